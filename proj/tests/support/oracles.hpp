#pragma once

// Reference implementations the tests compare against. They are written for
// obviousness, not speed, and share no code with the library.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace histkit::testing {

// Memoized recursion on (i, j) suffixes.
std::size_t oracle_levenshtein(const std::u32string& a, const std::u32string& b);

// Random string of up to max_len code points drawn from a mix of ASCII,
// Latin-1 letters, Greek, CJK and astral-plane symbols.
std::u32string random_unicode(std::mt19937_64& rng, std::size_t max_len);

// Bitext hits by full enumeration: for query i, compute every cosine in
// double from scratch and count candidates (not excluded, not gold) scoring
// at least as high as gold. Hit iff that count is zero.
struct OracleBitext {
  std::size_t hits_fwd = 0;
  std::size_t hits_rev = 0;
};
OracleBitext oracle_bitext(const std::vector<std::vector<float>>& src, const std::vector<std::vector<float>>& tgt,
                           const std::vector<std::vector<std::size_t>>& excluded_fwd,
                           const std::vector<std::vector<std::size_t>>& excluded_rev);

// Minimum SSE over every assignment of the points to k nonempty groups.
double oracle_best_sse(const std::vector<std::vector<double>>& points, int k);

// Central differences of f at x, step h.
std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h);

// ||a - b|| / max(||a||, ||b||), 0 when both are zero.
double relative_error(const std::vector<double>& a, const std::vector<double>& b);

// Triple-loop y = W x + b with W row-major.
std::vector<double> oracle_affine(const std::vector<double>& W, const std::vector<double>& b,
                                  const std::vector<double>& x);

// Toy cross-lingual data: targets are random unit vectors, sources a fixed
// random rotation of them plus isotropic Gaussian noise.
struct RotationTask {
  std::size_t dim = 0;
  std::vector<std::vector<float>> target;
  std::vector<std::vector<float>> source;
  std::vector<double> rotation;  // row-major dim x dim, orthonormal rows
};
RotationTask make_rotation_task(std::size_t n, std::size_t dim, double sigma, std::uint64_t seed);

// Random unit vector.
std::vector<float> random_unit(std::mt19937_64& rng, std::size_t dim);

}  // namespace histkit::testing
