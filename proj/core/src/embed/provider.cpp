#include "histkit/embed/provider.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <thread>

#include "common/http.hpp"
#include "histkit/error.hpp"
#include "json.hpp"

namespace histkit::embed {
namespace {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view a, std::string_view b) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const char c : a) mix(static_cast<unsigned char>(c));
  mix(0);
  for (const char c : b) mix(static_cast<unsigned char>(c));
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

// (0, 1]
double unit_open(std::uint64_t& state) {
  return (static_cast<double>(splitmix64(state) >> 11U) + 1.0) * 0x1.0p-53;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : std::move(fallback);
}

}  // namespace

StubProvider::StubProvider(std::size_t dim, std::string model) : dim_(dim), model_(std::move(model)) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "stub provider: dim must be > 0");
}

std::vector<float> StubProvider::embed_one(std::string_view text) const {
  std::uint64_t state = fnv1a(model_, text);
  std::vector<double> v(dim_);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    // Box-Muller; the sine half is discarded to keep the stream simple.
    const double r = std::sqrt(-2.0 * std::log(unit_open(state)));
    v[i] = r * std::cos(2.0 * std::numbers::pi * unit_open(state));
    norm2 += v[i] * v[i];
  }
  const double inv = 1.0 / std::sqrt(norm2);
  std::vector<float> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

std::vector<std::vector<float>> StubProvider::embed_batch(std::span<const std::string> texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

RemoteProviderConfig RemoteProviderConfig::from_env() {
  RemoteProviderConfig cfg;
  cfg.url = env_or("HISTKIT_EMBED_URL", "");
  cfg.api_key = env_or("HISTKIT_EMBED_KEY", "");
  cfg.model = env_or("HISTKIT_EMBED_MODEL", cfg.model);
  return cfg;
}

RemoteProvider::RemoteProvider(RemoteProviderConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "remote provider: no endpoint URL (set HISTKIT_EMBED_URL)");
  }
  http::parse_endpoint(config_.url);
}

std::optional<std::size_t> RemoteProvider::dimension() const {
  std::lock_guard lock(mu_);
  return dim_;
}

std::vector<std::vector<float>> RemoteProvider::request_once(std::span<const std::string> texts) const {
  const json request = {{"model", config_.model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto res = http::post_json(http::parse_endpoint(config_.url), request.dump(), config_.api_key,
                                   config_.timeout);
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::kTransport, "embeddings endpoint returned HTTP " + std::to_string(res.status));
  }
  std::vector<std::vector<float>> out(texts.size());
  try {
    const auto doc = json::parse(res.body);
    const auto& data = doc.at("data");
    if (data.size() != texts.size()) {
      throw Error(ErrorCode::kParse, "embeddings endpoint returned " + std::to_string(data.size()) +
                                         " vectors for " + std::to_string(texts.size()) + " inputs");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& item = data[i];
      const auto index = item.contains("index") ? item.at("index").get<std::size_t>() : i;
      if (index >= out.size() || !out[index].empty()) {
        throw Error(ErrorCode::kParse, "embeddings endpoint returned a bad index " + std::to_string(index));
      }
      out[index] = item.at("embedding").get<std::vector<float>>();
      if (out[index].empty()) throw Error(ErrorCode::kParse, "embeddings endpoint returned an empty vector");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed embeddings response: ") + e.what());
  }
  return out;
}

std::vector<std::vector<float>> RemoteProvider::embed_batch(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  const int attempts = config_.retry.retries + 1;
  std::string last;
  ErrorCode last_code = ErrorCode::kTransport;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry.backoff_before(attempt));
    try {
      auto out = request_once(texts);
      std::lock_guard lock(mu_);
      if (!dim_) dim_ = out.front().size();
      return out;
    } catch (const Error& e) {
      last = e.what();
      last_code = e.code();
    }
  }
  throw Error(last_code, "embedding request failed after " + std::to_string(attempts) + " attempts: " + last);
}

FileProvider::FileProvider(const std::filesystem::path& path, std::string model) : model_(std::move(model)) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = json::parse(line);
      auto text = obj.at("text").get<std::string>();
      auto vec = obj.at("embedding").get<std::vector<float>>();
      if (vec.empty()) throw Error(ErrorCode::kParse, "empty embedding");
      if (dim_ == 0) dim_ = vec.size();
      if (vec.size() != dim_) throw Error(ErrorCode::kParse, "embedding dimension differs from earlier lines");
      table_.insert_or_assign(std::move(text), std::move(vec));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (dim_ == 0) throw Error(ErrorCode::kParse, path.string() + ": no embeddings");
}

std::vector<std::vector<float>> FileProvider::embed_batch(std::span<const std::string> texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto it = table_.find(t);
    if (it == table_.end()) throw Error(ErrorCode::kNotFound, "file provider has no embedding for \"" + t + "\"");
    out.push_back(it->second);
  }
  return out;
}

EmbeddingMatrix embed_texts(Provider& provider, std::span<const std::string> texts,
                            std::size_t batch_size, std::span<const std::string> ids) {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "embed_texts: batch_size must be >= 1");
  if (!ids.empty() && ids.size() != texts.size()) {
    throw Error(ErrorCode::kInvalidArgument, "embed_texts: ids and texts differ in length");
  }
  std::optional<std::size_t> dim = provider.dimension();
  std::vector<float> data;
  for (std::size_t start = 0; start < texts.size(); start += batch_size) {
    const auto count = std::min(batch_size, texts.size() - start);
    const auto vectors = provider.embed_batch(texts.subspan(start, count));
    if (vectors.size() != count) {
      throw Error(ErrorCode::kCorrupt, "provider returned " + std::to_string(vectors.size()) +
                                           " vectors for a batch of " + std::to_string(count));
    }
    for (const auto& v : vectors) {
      if (!dim) dim = v.size();
      if (v.size() != *dim) {
        throw Error(ErrorCode::kCorrupt, "dimension drift: provider returned " + std::to_string(v.size()) +
                                             "-dim vector, expected " + std::to_string(*dim));
      }
      data.insert(data.end(), v.begin(), v.end());
    }
  }
  if (!dim) {
    throw Error(ErrorCode::kInvalidArgument, "embed_texts: provider dimension unknown for empty input");
  }
  std::vector<std::string> row_ids;
  row_ids.reserve(texts.size());
  if (ids.empty()) {
    for (std::size_t i = 0; i < texts.size(); ++i) row_ids.push_back(std::to_string(i));
  } else {
    row_ids.assign(ids.begin(), ids.end());
  }
  return EmbeddingMatrix(*dim, std::move(row_ids), std::move(data), false);
}

}  // namespace histkit::embed
