#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "histkit/embed/matrix.hpp"

namespace histkit::adapt {

enum class Objective { kContrastive, kDistill };
enum class Strategy { kHist, kModern, kMixed };
// Which embedding sides the adapter is meant for at inference time.
enum class ApplyTo { kSource, kBoth };

std::string_view to_string(Objective o);
std::string_view to_string(Strategy s);
std::string_view to_string(ApplyTo a);
// Throw Error(kInvalidArgument) on unknown names.
Objective parse_objective(std::string_view s);
Strategy parse_strategy(std::string_view s);
ApplyTo parse_apply_to(std::string_view s);

// Affine map x -> Wx + b over frozen base embeddings. W is row-major dim x dim.
struct AdapterModel {
  std::size_t dim = 0;
  std::vector<double> W;
  std::vector<double> b;

  Objective objective = Objective::kContrastive;
  Strategy strategy = Strategy::kHist;
  std::size_t hist_pairs = 0;
  std::size_t modern_pairs = 0;
  std::uint64_t seed = 0;
  double scale = 20.0;
  double learning_rate = 0.0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  ApplyTo apply_to = ApplyTo::kSource;

  static AdapterModel identity(std::size_t dim);
  // Shape checks; throws Error(kInvalidArgument).
  void validate() const;

  bool operator==(const AdapterModel&) const = default;
};

// Wx + b. Throws Error(kInvalidArgument) on a dimension mismatch.
std::vector<double> apply_adapter(const AdapterModel& model, std::span<const double> x);
std::vector<float> apply_adapter(const AdapterModel& model, std::span<const float> x);
// Every row mapped; the result keeps the ids and is not normalized.
embed::EmbeddingMatrix apply_adapter(const AdapterModel& model, const embed::EmbeddingMatrix& m);

// Binary layout, little-endian:
//   "HXAD" | u32 version=1 | u32 header length | JSON header |
//   dim*dim f64 W (row-major) | dim f64 b
// The header carries dim and the training metadata. Errors: kBadMagic,
// kBadVersion, kTruncated, kCorrupt.
std::string encode_adapter(const AdapterModel& model);
AdapterModel decode_adapter(std::string_view bytes);
void save_adapter(const AdapterModel& model, const std::filesystem::path& path);
AdapterModel load_adapter(const std::filesystem::path& path);

}  // namespace histkit::adapt
