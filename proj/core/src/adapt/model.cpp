#include "histkit/adapt/model.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <utility>

#include "common/binary.hpp"
#include "common/fs_util.hpp"
#include "histkit/error.hpp"
#include "json.hpp"

namespace histkit::adapt {
namespace {

constexpr std::string_view kMagic = "HXAD";
constexpr std::uint32_t kVersion = 1;
// Far beyond any embedding width; guards allocation from a corrupt header.
constexpr std::size_t kMaxDim = 1U << 14;
constexpr std::uint32_t kMaxHeader = 1U << 20;

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table, std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  std::string options;
  for (const auto& [name, value] : table) {
    if (!options.empty()) options += "|";
    options += name;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown " + std::string(what) + " \"" + std::string(s) + "\" (expected " + options + ")");
}

constexpr std::array<std::pair<std::string_view, Objective>, 2> kObjectives{
    {{"contrastive", Objective::kContrastive}, {"distill", Objective::kDistill}}};
constexpr std::array<std::pair<std::string_view, Strategy>, 3> kStrategies{
    {{"hist", Strategy::kHist}, {"modern", Strategy::kModern}, {"mixed", Strategy::kMixed}}};
constexpr std::array<std::pair<std::string_view, ApplyTo>, 2> kApplyTo{
    {{"source", ApplyTo::kSource}, {"both", ApplyTo::kBoth}}};

void check_dim(const AdapterModel& m, std::size_t n) {
  if (n != m.dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "adapter dim " + std::to_string(m.dim) + " does not match vector dim " + std::to_string(n));
  }
}

template <typename T>
std::vector<T> affine(const AdapterModel& m, std::span<const T> x) {
  check_dim(m, x.size());
  std::vector<T> out(m.dim);
  for (std::size_t r = 0; r < m.dim; ++r) {
    double acc = m.b[r];
    const double* w = m.W.data() + r * m.dim;
    for (std::size_t c = 0; c < m.dim; ++c) acc += w[c] * static_cast<double>(x[c]);
    out[r] = static_cast<T>(acc);
  }
  return out;
}

}  // namespace

std::string_view to_string(Objective o) { return o == Objective::kContrastive ? "contrastive" : "distill"; }
std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kHist:
      return "hist";
    case Strategy::kModern:
      return "modern";
    case Strategy::kMixed:
      return "mixed";
  }
  return "?";
}
std::string_view to_string(ApplyTo a) { return a == ApplyTo::kSource ? "source" : "both"; }

Objective parse_objective(std::string_view s) { return parse_enum(s, kObjectives, "objective"); }
Strategy parse_strategy(std::string_view s) { return parse_enum(s, kStrategies, "strategy"); }
ApplyTo parse_apply_to(std::string_view s) { return parse_enum(s, kApplyTo, "apply_to"); }

AdapterModel AdapterModel::identity(std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "adapter dim must be positive");
  AdapterModel m;
  m.dim = dim;
  m.W.assign(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) m.W[i * dim + i] = 1.0;
  m.b.assign(dim, 0.0);
  return m;
}

void AdapterModel::validate() const {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "adapter dim must be positive");
  if (W.size() != dim * dim) {
    throw Error(ErrorCode::kInvalidArgument, "adapter W has " + std::to_string(W.size()) + " entries, expected " +
                                                 std::to_string(dim * dim));
  }
  if (b.size() != dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "adapter b has " + std::to_string(b.size()) + " entries, expected " + std::to_string(dim));
  }
}

std::vector<double> apply_adapter(const AdapterModel& model, std::span<const double> x) { return affine(model, x); }
std::vector<float> apply_adapter(const AdapterModel& model, std::span<const float> x) { return affine(model, x); }

embed::EmbeddingMatrix apply_adapter(const AdapterModel& model, const embed::EmbeddingMatrix& m) {
  check_dim(model, m.dim());
  std::vector<float> data;
  data.reserve(m.size() * m.dim());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto row = affine(model, m.row(i));
    data.insert(data.end(), row.begin(), row.end());
  }
  return embed::EmbeddingMatrix(m.dim(), m.ids(), std::move(data), false);
}

std::string encode_adapter(const AdapterModel& model) {
  model.validate();
  const nlohmann::json header = {
      {"dim", model.dim},
      {"objective", to_string(model.objective)},
      {"strategy", to_string(model.strategy)},
      {"hist_pairs", model.hist_pairs},
      {"modern_pairs", model.modern_pairs},
      {"seed", model.seed},
      {"scale", model.scale},
      {"lr", model.learning_rate},
      {"epochs", model.epochs},
      {"batch_size", model.batch_size},
      {"apply_to", to_string(model.apply_to)},
  };
  const std::string text = header.dump();
  binary::Writer w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text);
  for (double x : model.W) w.f64(x);
  for (double x : model.b) w.f64(x);
  return w.take();
}

AdapterModel decode_adapter(std::string_view bytes) {
  binary::Reader r(bytes);
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kBadMagic, "bad magic: not an HXAD adapter file");
  }
  const auto version = r.u32();
  if (version != kVersion) {
    throw Error(ErrorCode::kBadVersion,
                "bad version: HXAD version " + std::to_string(version) + " is not supported");
  }
  const auto header_len = r.u32();
  if (header_len > kMaxHeader) throw Error(ErrorCode::kCorrupt, "corrupt: header length " + std::to_string(header_len));
  const auto header_text = r.bytes(header_len);

  AdapterModel m;
  try {
    const auto h = nlohmann::json::parse(header_text);
    m.dim = h.at("dim").get<std::size_t>();
    m.objective = parse_objective(h.at("objective").get<std::string>());
    m.strategy = parse_strategy(h.at("strategy").get<std::string>());
    m.hist_pairs = h.at("hist_pairs").get<std::size_t>();
    m.modern_pairs = h.at("modern_pairs").get<std::size_t>();
    m.seed = h.at("seed").get<std::uint64_t>();
    m.scale = h.at("scale").get<double>();
    m.learning_rate = h.at("lr").get<double>();
    m.epochs = h.at("epochs").get<std::size_t>();
    m.batch_size = h.at("batch_size").get<std::size_t>();
    m.apply_to = parse_apply_to(h.at("apply_to").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorrupt, std::string("corrupt: header: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, std::string("corrupt: header: ") + e.what());
  }
  if (m.dim == 0 || m.dim > kMaxDim) throw Error(ErrorCode::kCorrupt, "corrupt: dim " + std::to_string(m.dim));
  const std::size_t count = m.dim * m.dim + m.dim;
  if (r.remaining() < count * 8) throw Error(ErrorCode::kTruncated, "truncated: weights shorter than dim x dim + dim");
  m.W.resize(m.dim * m.dim);
  m.b.resize(m.dim);
  for (auto& x : m.W) x = r.f64();
  for (auto& x : m.b) x = r.f64();
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kCorrupt, "corrupt: " + std::to_string(r.remaining()) + " trailing bytes");
  }
  for (double x : m.W) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kCorrupt, "corrupt: non-finite weight");
  }
  for (double x : m.b) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kCorrupt, "corrupt: non-finite bias");
  }
  return m;
}

void save_adapter(const AdapterModel& model, const std::filesystem::path& path) {
  const std::string bytes = encode_adapter(model);
  fs_util::write_atomically(path, [&](std::ostream& out) { out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); });
}

AdapterModel load_adapter(const std::filesystem::path& path) {
  const std::string bytes = fs_util::read_file(path);
  try {
    return decode_adapter(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace histkit::adapt
