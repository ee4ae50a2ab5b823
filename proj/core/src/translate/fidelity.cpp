#include "histkit/translate/fidelity.hpp"

#include <array>
#include <fstream>

#include "histkit/error.hpp"
#include "histkit/text.hpp"
#include "json.hpp"

namespace histkit::translate {

void FidelityReport::merge(const FidelityReport& other) {
  total += other.total;
  mismatched.insert(mismatched.end(), other.mismatched.begin(), other.mismatched.end());
}

FidelityReport validate_fidelity(std::span<const SentencePair> pairs,
                                 const corpus::Article& article) {
  const std::string original = corpus::joined_text(article);
  const std::string haystack = text::collapse_whitespace(original);
  FidelityReport report;
  report.total = pairs.size();
  for (const auto& p : pairs) {
    if (p.article_id != article.id) {
      throw Error(ErrorCode::kInvalidArgument, "fidelity: pair from article \"" + p.article_id +
                                                   "\" checked against \"" + article.id + "\"");
    }
    const std::string needle = text::collapse_whitespace(p.source_text);
    if (needle.empty() || haystack.find(needle) == std::string::npos) {
      report.mismatched.push_back({p.article_id, p.index, p.source_text, original});
    }
  }
  return report;
}

QuadrupletAlignment align_quadruplets(std::span<const SentencePair> pairs_de,
                                      std::span<const SentencePair> pairs_fr,
                                      std::span<const SentencePair> pairs_en) {
  struct Slot {
    std::size_t count = 0;
    const SentencePair* pair = nullptr;
  };
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::array<Slot, 3>> groups;
  const std::array<std::span<const SentencePair>, 3> runs{pairs_de, pairs_fr, pairs_en};
  for (std::size_t lang = 0; lang < runs.size(); ++lang) {
    for (const auto& p : runs[lang]) {
      auto& slot = groups[{p.article_id, p.source_text}][lang];
      ++slot.count;
      slot.pair = &p;
    }
  }

  QuadrupletAlignment out;
  out.distinct_sources = groups.size();
  for (const auto& [key, slots] : groups) {
    if (slots[0].count != 1 || slots[1].count != 1 || slots[2].count != 1) continue;
    out.quadruplets.push_back({key.second, slots[0].pair->target_text, slots[1].pair->target_text,
                               slots[2].pair->target_text, key.first});
  }
  return out;
}

std::vector<Correction> load_corrections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<Correction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      Correction c;
      c.article_id = obj.at("article_id").get<std::string>();
      c.index = obj.at("index").get<int>();
      c.source_text = obj.at("lb").get<std::string>();
      c.lang = obj.value("lang", std::string{});
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::size_t apply_corrections(std::vector<SentencePair>& pairs,
                              std::span<const Correction> corrections) {
  std::size_t changed = 0;
  for (auto& p : pairs) {
    // Later entries win, and a language-specific fix beats a generic one.
    const Correction* best = nullptr;
    for (const auto& c : corrections) {
      if (c.article_id != p.article_id || c.index != p.index) continue;
      if (!c.lang.empty() && c.lang != p.target_lang) continue;
      if (best == nullptr || !c.lang.empty() || best->lang.empty()) best = &c;
    }
    if (best != nullptr && best->source_text != p.source_text) {
      p.source_text = best->source_text;
      ++changed;
    }
  }
  return changed;
}

}  // namespace histkit::translate
