#include "histkit/server/index.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "common/fs_util.hpp"
#include "histkit/error.hpp"
#include "json.hpp"

namespace histkit::server {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::string_view kFormat = "histkit-index";
constexpr int kVersion = 1;
constexpr std::size_t kMaxOffenders = 10;

std::string join_first(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kMaxOffenders; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kMaxOffenders) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

json payload_json(const Payload& p) {
  json j = {{"id", p.id}, {"text", p.text}, {"article_id", p.article_id}, {"newspaper", p.newspaper}};
  j["year"] = p.year ? json(*p.year) : json(nullptr);
  return j;
}

Payload payload_from_json(const json& j) {
  Payload p;
  p.id = j.at("id").get<std::string>();
  p.text = j.at("text").get<std::string>();
  p.article_id = j.value("article_id", "");
  p.newspaper = j.value("newspaper", "");
  if (j.contains("year") && !j.at("year").is_null()) p.year = j.at("year").get<int>();
  return p;
}

std::vector<Payload> read_payloads(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kCorrupt, "index: missing payload file " + path.string());
  std::vector<Payload> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(payload_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kCorrupt, path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string unique_suffix() {
  std::random_device rd;
  std::ostringstream s;
  s << std::hex << rd() << rd();
  return s.str();
}

}  // namespace

SearchIndex::SearchIndex(IndexInput input)
    : name_(std::move(input.name)),
      model_(std::move(input.model)),
      sides_(std::move(input.sides)),
      adapter_(std::move(input.adapter)),
      adapter_langs_(std::move(input.adapter_langs)) {
  std::set<std::string> langs;
  for (const auto& side : sides_) {
    if (!langs.insert(side.lang).second) {
      throw Error(ErrorCode::kInvalidArgument, "index: duplicate side \"" + side.lang + "\"");
    }
    if (dim_ == 0) dim_ = side.embeddings.dim();
    if (side.embeddings.dim() != dim_) {
      throw Error(ErrorCode::kInvalidArgument, "index: side \"" + side.lang + "\" has dim " +
                                                   std::to_string(side.embeddings.dim()) + ", expected " +
                                                   std::to_string(dim_));
    }
    if (side.payloads.size() != side.embeddings.size()) {
      throw Error(ErrorCode::kInvalidArgument, "index: side \"" + side.lang + "\" has " +
                                                   std::to_string(side.payloads.size()) + " payloads but " +
                                                   std::to_string(side.embeddings.size()) + " embedding rows");
    }
    std::vector<std::string> offenders;
    for (std::size_t i = 0; i < side.payloads.size(); ++i) {
      if (side.payloads[i].id != side.embeddings.ids()[i]) offenders.push_back(side.payloads[i].id);
    }
    if (!offenders.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "index: side \"" + side.lang + "\" payload/embedding ids differ at: " + join_first(offenders));
    }
  }
  if (adapter_) {
    adapter_->validate();
    if (dim_ != 0 && adapter_->dim != dim_) {
      throw Error(ErrorCode::kInvalidArgument, "index: adapter dim " + std::to_string(adapter_->dim) +
                                                   " does not match embedding dim " + std::to_string(dim_));
    }
  } else if (!adapter_langs_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "index: adapter languages given without an adapter");
  }
  for (const auto& side : sides_) {
    if (side.adapted != adapts(side.lang)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "index: side \"" + side.lang + "\" adapted flag disagrees with the adapter languages");
    }
  }
}

const IndexSide* SearchIndex::side(const std::string& lang) const {
  for (const auto& s : sides_) {
    if (s.lang == lang) return &s;
  }
  return nullptr;
}

bool SearchIndex::adapts(const std::string& lang) const {
  return adapter_ && std::find(adapter_langs_.begin(), adapter_langs_.end(), lang) != adapter_langs_.end();
}

SearchIndex build_index(const fs::path& dir, const std::string& name, const std::string& model,
                        std::vector<SideSource> sources, const std::optional<adapt::AdapterModel>& adapter,
                        std::vector<std::string> adapter_langs) {
  if (sources.empty()) throw Error(ErrorCode::kInvalidArgument, "build_index: no sides");
  if (adapter && adapter_langs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "build_index: adapter given but no side to apply it to");
  }
  for (const auto& lang : adapter_langs) {
    const bool known = std::any_of(sources.begin(), sources.end(), [&](const SideSource& s) { return s.lang == lang; });
    if (!known) throw Error(ErrorCode::kInvalidArgument, "build_index: adapter language \"" + lang + "\" has no side");
  }

  IndexInput input{name, model, {}, adapter, adapter_langs};
  for (auto& src : sources) {
    std::unordered_set<std::string> payload_ids;
    std::vector<std::string> offenders;
    for (const auto& p : src.payloads) {
      if (!payload_ids.insert(p.id).second) offenders.push_back(p.id + " (duplicate payload)");
      if (!src.embeddings.find(p.id)) offenders.push_back(p.id + " (no embedding)");
    }
    for (const auto& id : src.embeddings.ids()) {
      if (!payload_ids.count(id)) offenders.push_back(id + " (no payload)");
    }
    if (!offenders.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "build_index: ids do not align on side \"" + src.lang + "\": " + join_first(offenders));
    }
    std::vector<std::string> order;
    order.reserve(src.payloads.size());
    for (const auto& p : src.payloads) order.push_back(p.id);
    auto rows = src.embeddings.gather(order);
    const bool adapt_side =
        adapter && std::find(adapter_langs.begin(), adapter_langs.end(), src.lang) != adapter_langs.end();
    if (adapt_side) rows = adapt::apply_adapter(*adapter, rows);
    input.sides.push_back({src.lang, std::move(src.payloads), std::move(rows), adapt_side});
  }
  SearchIndex index(std::move(input));

  const fs::path target = fs::absolute(dir).lexically_normal();
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  const fs::path tmp = parent / (target.filename().string() + ".tmp-" + unique_suffix());
  fs::create_directories(tmp);
  try {
    json manifest = {{"format", kFormat}, {"version", kVersion}, {"name", index.name()},
                     {"model", index.model()}, {"dim", index.dim()}};
    json sides = json::array();
    for (const auto& side : index.sides()) {
      const std::string payload_file = fs_util::encode_filename(side.lang) + ".payloads.jsonl";
      const std::string emb_file = fs_util::encode_filename(side.lang) + ".hxem";
      fs_util::write_atomically(tmp / payload_file, [&](std::ostream& out) {
        for (const auto& p : side.payloads) out << payload_json(p).dump() << '\n';
      });
      embed::save_matrix(side.embeddings, tmp / emb_file);
      sides.push_back({{"lang", side.lang},
                       {"count", side.payloads.size()},
                       {"payloads", payload_file},
                       {"embeddings", emb_file},
                       {"adapted", side.adapted}});
    }
    manifest["sides"] = sides;
    if (index.adapter()) {
      adapt::save_adapter(*index.adapter(), tmp / "adapter.hxad");
      manifest["adapter"] = "adapter.hxad";
    } else {
      manifest["adapter"] = nullptr;
    }
    manifest["adapter_langs"] = index.adapter_langs();
    fs_util::write_atomically(tmp / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });

    // A directory cannot be renamed over a non-empty one, so the old index
    // moves aside first and is removed once the new one is in place.
    fs::path old;
    if (fs::exists(target)) {
      old = parent / (target.filename().string() + ".old-" + unique_suffix());
      fs::rename(target, old);
    }
    fs::rename(tmp, target);
    if (!old.empty()) fs::remove_all(old);
  } catch (const fs::filesystem_error& e) {
    fs::remove_all(tmp);
    throw Error(ErrorCode::kIo, std::string("build_index: ") + e.what());
  } catch (...) {
    fs::remove_all(tmp);
    throw;
  }
  return index;
}

SearchIndex load_index(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw Error(ErrorCode::kIo, "index: no manifest.json in " + dir.string());

  IndexInput input;
  std::vector<std::tuple<std::string, std::size_t, std::string, std::string, bool>> side_entries;
  std::string adapter_file;
  try {
    const json m = json::parse(fs_util::read_file(manifest_path));
    if (m.at("format").get<std::string>() != kFormat) throw Error(ErrorCode::kCorrupt, "unexpected format tag");
    if (m.at("version").get<int>() != kVersion) {
      throw Error(ErrorCode::kCorrupt, "unsupported version " + std::to_string(m.at("version").get<int>()));
    }
    input.name = m.at("name").get<std::string>();
    input.model = m.value("model", "");
    for (const auto& s : m.at("sides")) {
      side_entries.emplace_back(s.at("lang").get<std::string>(), s.at("count").get<std::size_t>(),
                                s.at("payloads").get<std::string>(), s.at("embeddings").get<std::string>(),
                                s.at("adapted").get<bool>());
    }
    if (m.contains("adapter") && !m.at("adapter").is_null()) adapter_file = m.at("adapter").get<std::string>();
    input.adapter_langs = m.value("adapter_langs", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorrupt, manifest_path.string() + ": corrupt manifest: " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, manifest_path.string() + ": corrupt manifest: " + e.what());
  }

  // File names come from the manifest; refuse anything that leaves the directory.
  auto inside = [&](const std::string& file) {
    const fs::path p(file);
    if (p.empty() || p.is_absolute() || p.has_parent_path() || file == "." || file == "..") {
      throw Error(ErrorCode::kCorrupt, manifest_path.string() + ": corrupt manifest: bad file name \"" + file + "\"");
    }
    return dir / p;
  };

  for (const auto& [lang, count, payload_file, emb_file, adapted] : side_entries) {
    auto payloads = read_payloads(inside(payload_file));
    auto emb = embed::load_matrix(inside(emb_file));
    if (payloads.size() != count || emb.size() != count) {
      throw Error(ErrorCode::kCorrupt, "index: side \"" + lang + "\" manifest count " + std::to_string(count) +
                                           " vs " + std::to_string(payloads.size()) + " payloads and " +
                                           std::to_string(emb.size()) + " rows");
    }
    input.sides.push_back({lang, std::move(payloads), std::move(emb), adapted});
  }
  if (!adapter_file.empty()) input.adapter = adapt::load_adapter(inside(adapter_file));
  try {
    return SearchIndex(std::move(input));
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, std::string("index: ") + e.what());
  }
}

}  // namespace histkit::server
