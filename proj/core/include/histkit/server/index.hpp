#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "histkit/adapt/model.hpp"
#include "histkit/embed/matrix.hpp"

namespace histkit::server {

struct Payload {
  std::string id;
  std::string text;
  std::string article_id;
  std::string newspaper;
  std::optional<int> year;

  bool operator==(const Payload&) const = default;
};

// One language side: payloads and embedding rows in the same order.
struct IndexSide {
  std::string lang;
  std::vector<Payload> payloads;
  embed::EmbeddingMatrix embeddings;
  bool adapted = false;  // adapter already applied to the stored rows
};

struct IndexInput {
  std::string name;
  std::string model;  // embedding model the rows came from
  std::vector<IndexSide> sides;
  std::optional<adapt::AdapterModel> adapter;
  // Sides (and query languages) the adapter applies to.
  std::vector<std::string> adapter_langs;
};

class SearchIndex {
 public:
  // Checks that payload ids and embedding ids coincide for every side, that
  // all sides share one dimension and that the adapter fits it.
  explicit SearchIndex(IndexInput input);

  const std::string& name() const { return name_; }
  const std::string& model() const { return model_; }
  std::size_t dim() const { return dim_; }
  const std::vector<IndexSide>& sides() const { return sides_; }
  const IndexSide* side(const std::string& lang) const;
  const std::optional<adapt::AdapterModel>& adapter() const { return adapter_; }
  const std::vector<std::string>& adapter_langs() const { return adapter_langs_; }
  bool adapts(const std::string& lang) const;

 private:
  std::string name_;
  std::string model_;
  std::size_t dim_ = 0;
  std::vector<IndexSide> sides_;
  std::optional<adapt::AdapterModel> adapter_;
  std::vector<std::string> adapter_langs_;
};

// Joins payloads to embedding rows by id, applies the adapter to the
// listed sides and writes the index directory:
//   manifest.json, <lang>.payloads.jsonl, <lang>.hxem, adapter.hxad
// The directory is assembled under a temporary sibling and renamed into
// place. Ids present on only one side of the join throw
// Error(kInvalidArgument) listing the first 10.
struct SideSource {
  std::string lang;
  std::vector<Payload> payloads;
  embed::EmbeddingMatrix embeddings;
};
SearchIndex build_index(const std::filesystem::path& dir, const std::string& name, const std::string& model,
                        std::vector<SideSource> sides, const std::optional<adapt::AdapterModel>& adapter,
                        std::vector<std::string> adapter_langs);

// Errors carry kCorrupt (bad manifest or inconsistent files), kIo, or the
// codes of the embedded file formats.
SearchIndex load_index(const std::filesystem::path& dir);

}  // namespace histkit::server
