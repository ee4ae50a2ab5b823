#include "histkit/embed/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/binary.hpp"
#include "common/fs_util.hpp"
#include "histkit/error.hpp"

namespace histkit::embed {
namespace {

constexpr std::string_view kMagic = "HXEM";
constexpr std::uint32_t kVersion = 1;
constexpr double kUnitTolerance = 1e-4;

double norm_of(std::span<const float> v) {
  double s = 0.0;
  for (const float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

bool ranks_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids,
                                 std::vector<float> data, bool normalized)
    : dim_(dim), ids_(std::move(ids)), data_(std::move(data)), normalized_(normalized) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding matrix: dim must be > 0");
  if (data_.size() != ids_.size() * dim_) {
    throw Error(ErrorCode::kInvalidArgument,
                "embedding matrix: data holds " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(ids_.size()) + " x " + std::to_string(dim_));
  }
  index_.reserve(ids_.size());
  norms_.resize(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "embedding matrix: duplicate id \"" + ids_[i] + "\"");
    }
    norms_[i] = norm_of(row(i));
    if (normalized_ && std::abs(norms_[i] - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::kInvalidArgument,
                  "embedding matrix: row " + std::to_string(i) + " is flagged normalized but has norm " +
                      std::to_string(norms_[i]));
    }
  }
}

std::optional<std::size_t> EmbeddingMatrix::find(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingMatrix::row_of(const std::string& id) const {
  const auto r = find(id);
  if (!r) throw Error(ErrorCode::kNotFound, "no embedding for id \"" + id + "\"");
  return *r;
}

EmbeddingMatrix EmbeddingMatrix::gather(std::span<const std::string> ids) const {
  std::vector<float> data;
  data.reserve(ids.size() * dim_);
  for (const auto& id : ids) {
    const auto r = row(row_of(id));
    data.insert(data.end(), r.begin(), r.end());
  }
  return EmbeddingMatrix(dim_, std::vector<std::string>(ids.begin(), ids.end()), std::move(data),
                         normalized_);
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  if (dim_ != other.dim_ || normalized_ != other.normalized_ || ids_ != other.ids_) return false;
  // Bitwise, so NaN payloads and signed zeros compare exactly.
  return data_.size() == other.data_.size() &&
         std::equal(data_.begin(), data_.end(), other.data_.begin(), [](float a, float b) {
           return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
         });
}

EmbeddingMatrix normalize_rows(const EmbeddingMatrix& m) {
  std::vector<float> data(m.data().begin(), m.data().end());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double n = m.row_norm(i);
    if (n == 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "normalize_rows: row " + std::to_string(i) + " (\"" + m.ids()[i] + "\") is zero");
    }
    for (std::size_t d = 0; d < m.dim(); ++d) {
      auto& x = data[i * m.dim() + d];
      x = static_cast<float>(static_cast<double>(x) / n);
    }
  }
  return EmbeddingMatrix(m.dim(), m.ids(), std::move(data), true);
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cosine: dimension mismatch (" + std::to_string(a.size()) +
                                                 " vs " + std::to_string(b.size()) + ")");
  }
  const double na = norm_of(a);
  const double nb = norm_of(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kInvalidArgument, "cosine: zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<Hit> knn(std::span<const float> query, const EmbeddingMatrix& m, std::size_t k,
                     const std::function<bool(std::size_t row)>& keep) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "knn: k must be >= 1");
  if (query.size() != m.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "knn: query has dimension " + std::to_string(query.size()) +
                                                 ", store has " + std::to_string(m.dim()));
  }
  const double qn = norm_of(query);
  if (qn == 0.0) throw Error(ErrorCode::kInvalidArgument, "knn: zero query vector");

  std::vector<Hit> hits;
  hits.reserve(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (keep && !keep(r)) continue;
    const double rn = m.row_norm(r);
    const double score = rn == 0.0 ? 0.0 : std::clamp(dot(query, m.row(r)) / (qn * rn), -1.0, 1.0);
    hits.push_back({m.ids()[r], score, r});
  }
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(), ranks_before);
  hits.resize(take);
  return hits;
}

std::vector<Hit> knn(std::span<const float> query, const EmbeddingMatrix& m, std::size_t k,
                     const std::unordered_set<std::string>& exclude) {
  if (exclude.empty()) return knn(query, m, k);
  return knn(query, m, k, [&](std::size_t r) { return !exclude.contains(m.ids()[r]); });
}

std::string encode_matrix(const EmbeddingMatrix& m) {
  binary::Writer w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(m.dim()));
  w.u64(m.size());
  w.u8(m.normalized() ? 1 : 0);
  for (const auto& id : m.ids()) {
    w.u32(static_cast<std::uint32_t>(id.size()));
    w.bytes(id);
  }
  for (const float x : m.data()) w.f32(x);
  return w.take();
}

EmbeddingMatrix decode_matrix(std::string_view bytes) {
  binary::Reader r(bytes);
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kBadMagic, "bad magic: not an HXEM embedding file");
  }
  const auto version = r.u32();
  if (version != kVersion) {
    throw Error(ErrorCode::kBadVersion, "bad version: HXEM version " + std::to_string(version) +
                                            " is not supported");
  }
  const auto dim = r.u32();
  const auto n = r.u64();
  const auto flag = r.u8();
  if (dim == 0) throw Error(ErrorCode::kCorrupt, "corrupt: dim is 0");
  if (flag > 1) throw Error(ErrorCode::kCorrupt, "corrupt: normalized flag is " + std::to_string(flag));
  // Every id costs at least its 4-byte length prefix.
  if (n > r.remaining() / 4) throw Error(ErrorCode::kTruncated, "truncated: id table shorter than n");

  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto len = r.u32();
    ids.emplace_back(r.bytes(len));
  }
  const std::uint64_t count = n * dim;
  if (count / dim != n || count > r.remaining() / 4) {
    throw Error(ErrorCode::kTruncated, "truncated: data section shorter than n x dim");
  }
  std::vector<float> data(count);
  for (auto& x : data) x = r.f32();
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kCorrupt, "corrupt: " + std::to_string(r.remaining()) + " trailing bytes");
  }
  try {
    return EmbeddingMatrix(dim, std::move(ids), std::move(data), flag == 1);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, std::string("corrupt: ") + e.what());
  }
}

void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  const std::string bytes = encode_matrix(m);
  fs_util::write_atomically(path, [&](std::ostream& out) { out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); });
}

EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
  const std::string bytes = fs_util::read_file(path);
  try {
    return decode_matrix(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace histkit::embed
