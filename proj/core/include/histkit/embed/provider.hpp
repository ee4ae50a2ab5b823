#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "histkit/embed/matrix.hpp"
#include "histkit/retry.hpp"

namespace histkit::embed {

// Source of sentence vectors. One provider instance yields one fixed
// dimension. Implementations must tolerate concurrent embed_batch calls.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string kind() const = 0;  // "remote", "file" or "stub"
  virtual std::string model_name() const = 0;
  // Known up front for stub and file providers; remote learns it on first use.
  virtual std::optional<std::size_t> dimension() const = 0;
  virtual std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) = 0;
};

// Deterministic pseudo-embeddings for tests: a unit vector drawn from a
// Gaussian stream seeded by the FNV-1a hash of (model name, text).
class StubProvider : public Provider {
 public:
  explicit StubProvider(std::size_t dim = 64, std::string model = "stub");

  std::string kind() const override { return "stub"; }
  std::string model_name() const override { return model_; }
  std::optional<std::size_t> dimension() const override { return dim_; }
  std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;

  std::vector<float> embed_one(std::string_view text) const;

 private:
  std::size_t dim_;
  std::string model_;
};

struct RemoteProviderConfig {
  std::string url;  // full embeddings endpoint
  std::string api_key;
  std::string model = "text-embedding-3-small";
  std::chrono::seconds timeout{60};
  RetryPolicy retry;

  // HISTKIT_EMBED_URL, HISTKIT_EMBED_KEY, HISTKIT_EMBED_MODEL.
  static RemoteProviderConfig from_env();
};

// OpenAI-compatible embeddings endpoint: {"model", "input": [...]} ->
// {"data": [{"index", "embedding"}]}.
class RemoteProvider : public Provider {
 public:
  explicit RemoteProvider(RemoteProviderConfig config);

  std::string kind() const override { return "remote"; }
  std::string model_name() const override { return config_.model; }
  std::optional<std::size_t> dimension() const override;
  std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;

 private:
  std::vector<std::vector<float>> request_once(std::span<const std::string> texts) const;

  RemoteProviderConfig config_;
  mutable std::mutex mu_;
  std::optional<std::size_t> dim_;
};

// Precomputed vectors exported from an external model, JSONL records
// {"text": str, "embedding": [float]}. Looks texts up verbatim; unknown texts
// throw Error(kNotFound).
class FileProvider : public Provider {
 public:
  explicit FileProvider(const std::filesystem::path& path, std::string model = "file");

  std::string kind() const override { return "file"; }
  std::string model_name() const override { return model_; }
  std::optional<std::size_t> dimension() const override { return dim_; }
  std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) override;

 private:
  std::string model_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<float>> table_;
};

// Row i embeds texts[i]; ids default to "0".."n-1". Batches are sent in
// order. Throws Error(kCorrupt) when a batch's dimension differs from the
// first one.
EmbeddingMatrix embed_texts(Provider& provider, std::span<const std::string> texts,
                            std::size_t batch_size, std::span<const std::string> ids = {});

}  // namespace histkit::embed
