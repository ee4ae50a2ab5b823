#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace histkit::translate {

struct SentencePair {
  std::string source_text;  // Luxembourgish sentence as regenerated by the model
  std::string target_text;
  std::string target_lang;
  std::string article_id;
  int index = 0;  // position within the article's segmentation

  bool operator==(const SentencePair&) const = default;
};

// Stable identifier "<article_id>:<index>" used for embeddings and tasks.
std::string pair_id(const SentencePair& pair);

// JSONL records: {"article_id", "index", "lb", "tgt", "lang"}.
std::vector<SentencePair> read_pairs(std::istream& in);
std::vector<SentencePair> load_pairs(const std::filesystem::path& path);
void write_pairs(std::ostream& out, std::span<const SentencePair> pairs);
void save_pairs(const std::filesystem::path& path, std::span<const SentencePair> pairs);

}  // namespace histkit::translate
