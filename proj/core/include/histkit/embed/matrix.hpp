#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace histkit::embed {

// Immutable row-major store of float32 sentence vectors keyed by id.
class EmbeddingMatrix {
 public:
  // Validates shape, id uniqueness and, when `normalized`, unit row norms
  // (within 1e-4). Throws Error(kInvalidArgument).
  EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> data,
                  bool normalized = false);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool normalized() const { return normalized_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  // L2 norm of row i, accumulated in double.
  double row_norm(std::size_t i) const { return norms_[i]; }

  std::optional<std::size_t> find(const std::string& id) const;
  // Throws Error(kNotFound) naming the id.
  std::size_t row_of(const std::string& id) const;

  // Rows in the order of `ids`; throws Error(kNotFound) for unknown ids.
  EmbeddingMatrix gather(std::span<const std::string> ids) const;

  bool operator==(const EmbeddingMatrix& other) const;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  bool normalized_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Throws Error(kInvalidArgument) naming the first zero row.
EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m);

double dot(std::span<const float> a, std::span<const float> b);

// dot(a,b) / (|a| |b|), accumulated in double. Throws on dimension mismatch
// or a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);

struct Hit {
  std::string id;
  double score = 0.0;
  std::size_t row = 0;

  bool operator==(const Hit&) const = default;
};

// Exact top-k by cosine: score descending, ties by ascending id. Rows for
// which `keep` returns false never appear; filtering happens before ranking.
std::vector<Hit> knn(std::span<const float> query, const EmbeddingMatrix& m, std::size_t k,
                     const std::function<bool(std::size_t row)>& keep = {});

std::vector<Hit> knn(std::span<const float> query, const EmbeddingMatrix& m, std::size_t k,
                     const std::unordered_set<std::string>& exclude);

// Binary layout, little-endian:
//   "HXEM" | u32 version=1 | u32 dim | u64 n | u8 normalized |
//   n x (u32 byte length + UTF-8 id) | n*dim f32
// Errors: kBadMagic, kBadVersion, kTruncated, kCorrupt.
void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_matrix(const std::filesystem::path& path);

std::string encode_matrix(const EmbeddingMatrix& m);
EmbeddingMatrix decode_matrix(std::string_view bytes);

}  // namespace histkit::embed
