#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace histkit::adapt {

// Dense row-major batch of n vectors of width dim.
struct Rows {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> v;

  Rows() = default;
  Rows(std::size_t n_, std::size_t dim_) : n(n_), dim(dim_), v(n_ * dim_, 0.0) {}

  std::span<double> row(std::size_t i) { return {v.data() + i * dim, dim}; }
  std::span<const double> row(std::size_t i) const { return {v.data() + i * dim, dim}; }
};

struct LossResult {
  double loss = 0.0;
  Rows grad_a;
  Rows grad_b;  // empty unless requested
};

// In-batch softmax cross-entropy over scale * cos(a_i, b_j), the diagonal
// being the positive, averaged over rows. Gradients wrt every a_i, and wrt
// every b_j when `want_grad_b`. Throws Error(kInvalidArgument) for n < 2,
// shape mismatch or a zero vector.
LossResult mnrl_loss(const Rows& a, const Rows& b, double scale = 20.0, bool want_grad_b = false);

// sum ||s_i - t_i||^2 / (n * dim), gradient wrt s.
LossResult distill_loss(const Rows& s, const Rows& t);

}  // namespace histkit::adapt
