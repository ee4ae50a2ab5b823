#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace histkit::corpus {

// A dated historical news document. Topic vectors hold non-negative topic
// proportions from an upstream topic model and share one dimension per
// collection.
struct Article {
  std::string id;
  std::string newspaper;
  int year = 0;
  std::string language;
  std::vector<std::string> sentences;
  std::optional<std::vector<double>> topic_vector;

  bool operator==(const Article&) const = default;
};

// One JSON object per line. Blank lines are skipped; any other malformed line
// raises an Error whose message names the 1-based line number.
std::vector<Article> read_articles(std::istream& in);
std::vector<Article> load_articles(const std::filesystem::path& path);

void write_articles(std::ostream& out, std::span<const Article> articles);
void save_articles(const std::filesystem::path& path, std::span<const Article> articles);

// Article text as presented to the translator: sentences joined by single
// spaces.
std::string joined_text(const Article& article);

}  // namespace histkit::corpus
