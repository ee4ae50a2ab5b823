#include "histkit/translate/sentence_pair.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "common/fs_util.hpp"
#include "histkit/error.hpp"
#include "json.hpp"

namespace histkit::translate {

using nlohmann::json;

std::string pair_id(const SentencePair& pair) {
  return pair.article_id + ":" + std::to_string(pair.index);
}

std::vector<SentencePair> read_pairs(std::istream& in) {
  std::vector<SentencePair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    try {
      const json obj = json::parse(line);
      SentencePair p;
      p.article_id = obj.at("article_id").get<std::string>();
      p.index = obj.at("index").get<int>();
      p.source_text = obj.at("lb").get<std::string>();
      p.target_text = obj.at("tgt").get<std::string>();
      p.target_lang = obj.at("lang").get<std::string>();
      if (p.index < 0) throw Error(ErrorCode::kParse, where + "negative index");
      pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, where + e.what());
    }
  }
  return pairs;
}

std::vector<SentencePair> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_pairs(in);
}

void write_pairs(std::ostream& out, std::span<const SentencePair> pairs) {
  for (const auto& p : pairs) {
    const json obj = {{"article_id", p.article_id},
                      {"index", p.index},
                      {"lb", p.source_text},
                      {"tgt", p.target_text},
                      {"lang", p.target_lang}};
    out << obj.dump() << '\n';
  }
}

void save_pairs(const std::filesystem::path& path, std::span<const SentencePair> pairs) {
  fs_util::write_atomically(path, [&](std::ostream& out) { write_pairs(out, pairs); });
}

}  // namespace histkit::translate
