#include "histkit/corpus/article.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "histkit/error.hpp"
#include "json.hpp"

namespace histkit::corpus {
namespace {

using nlohmann::json;

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": " + what);
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail_line(line_no, std::string("missing \"") + key + "\"");
  return *it;
}

Article parse_line(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    fail_line(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) fail_line(line_no, "expected a JSON object");

  Article a;
  const auto& id = require(obj, "id", line_no);
  const auto& newspaper = require(obj, "newspaper", line_no);
  const auto& year = require(obj, "year", line_no);
  const auto& language = require(obj, "language", line_no);
  const auto& sentences = require(obj, "sentences", line_no);
  if (!id.is_string() || id.get_ref<const std::string&>().empty()) {
    fail_line(line_no, "\"id\" must be a nonempty string");
  }
  if (!newspaper.is_string()) fail_line(line_no, "\"newspaper\" must be a string");
  if (!year.is_number_integer()) fail_line(line_no, "\"year\" must be an integer");
  if (!language.is_string()) fail_line(line_no, "\"language\" must be a string");
  if (!sentences.is_array() || sentences.empty()) {
    fail_line(line_no, "\"sentences\" must be a nonempty array");
  }
  a.id = id.get<std::string>();
  a.newspaper = newspaper.get<std::string>();
  a.year = year.get<int>();
  a.language = language.get<std::string>();
  for (const auto& s : sentences) {
    if (!s.is_string() || s.get_ref<const std::string&>().empty()) {
      fail_line(line_no, "\"sentences\" entries must be nonempty strings");
    }
    a.sentences.push_back(s.get<std::string>());
  }
  if (const auto it = obj.find("topic_vector"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) fail_line(line_no, "\"topic_vector\" must be an array");
    std::vector<double> topics;
    topics.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number()) fail_line(line_no, "\"topic_vector\" entries must be numbers");
      const double x = v.get<double>();
      if (!(x >= 0.0)) fail_line(line_no, "\"topic_vector\" entries must be >= 0");
      topics.push_back(x);
    }
    a.topic_vector = std::move(topics);
  }
  return a;
}

}  // namespace

std::vector<Article> read_articles(std::istream& in) {
  std::vector<Article> articles;
  std::unordered_map<std::string, std::size_t> first_line_of;
  std::optional<std::size_t> topic_dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Article a = parse_line(line, line_no);
    if (const auto [it, inserted] = first_line_of.emplace(a.id, line_no); !inserted) {
      throw Error(ErrorCode::kParse, "duplicate id \"" + a.id + "\" on line " +
                                         std::to_string(it->second) + " and line " +
                                         std::to_string(line_no));
    }
    if (a.topic_vector) {
      if (!topic_dim) topic_dim = a.topic_vector->size();
      if (a.topic_vector->size() != *topic_dim) {
        fail_line(line_no, "topic_vector has dimension " + std::to_string(a.topic_vector->size()) +
                               ", collection uses " + std::to_string(*topic_dim));
      }
    }
    articles.push_back(std::move(a));
  }
  return articles;
}

std::vector<Article> load_articles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_articles(in);
}

void write_articles(std::ostream& out, std::span<const Article> articles) {
  for (const auto& a : articles) {
    json obj = {{"id", a.id},
                {"newspaper", a.newspaper},
                {"year", a.year},
                {"language", a.language},
                {"sentences", a.sentences}};
    if (a.topic_vector) obj["topic_vector"] = *a.topic_vector;
    out << obj.dump() << '\n';
  }
}

void save_articles(const std::filesystem::path& path, std::span<const Article> articles) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_articles(out, articles);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string joined_text(const Article& article) {
  std::string text;
  for (const auto& s : article.sentences) {
    if (!text.empty()) text.push_back(' ');
    text += s;
  }
  return text;
}

}  // namespace histkit::corpus
