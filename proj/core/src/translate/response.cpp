#include "histkit/translate/response.hpp"

#include "json.hpp"

namespace histkit::translate {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// ```json\n...\n``` -> ...
std::string_view strip_code_fence(std::string_view body) {
  body = trim(body);
  if (!body.starts_with("```")) return body;
  const auto first_newline = body.find('\n');
  if (first_newline == std::string_view::npos) return body;
  auto inner = body.substr(first_newline + 1);
  inner = trim(inner);
  if (inner.ends_with("```")) inner.remove_suffix(3);
  return trim(inner);
}

}  // namespace

std::vector<SentencePair> parse_translation_response(std::string_view body,
                                                     std::string_view target_lang,
                                                     std::string_view article_id) {
  const std::string lang(target_lang);
  json doc;
  try {
    doc = json::parse(strip_code_fence(body));
  } catch (const json::parse_error& e) {
    throw ResponseParseError(std::nullopt, std::string("response is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ResponseParseError(std::nullopt, "response is not a JSON object");
  const auto it = doc.find("translation");
  if (it == doc.end()) throw ResponseParseError(std::nullopt, "missing key \"translation\"");
  if (!it->is_array()) throw ResponseParseError(std::nullopt, "\"translation\" is not an array");

  std::vector<SentencePair> pairs;
  pairs.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& item = (*it)[i];
    const auto at = "item " + std::to_string(i) + ": ";
    if (!item.is_object()) throw ResponseParseError(i, at + "not an object");
    for (const auto& [key, value] : item.items()) {
      if (key != "lb" && key != lang) throw ResponseParseError(i, at + "unexpected key \"" + key + "\"");
    }
    const auto src = item.find("lb");
    const auto tgt = item.find(lang);
    if (src == item.end()) throw ResponseParseError(i, at + "missing key \"lb\"");
    if (tgt == item.end()) throw ResponseParseError(i, at + "missing key \"" + lang + "\"");
    if (!src->is_string() || !tgt->is_string()) {
      throw ResponseParseError(i, at + "values must be strings");
    }
    SentencePair p;
    p.source_text = src->get<std::string>();
    p.target_text = tgt->get<std::string>();
    if (p.source_text.empty() || p.target_text.empty()) {
      throw ResponseParseError(i, at + "empty sentence");
    }
    p.target_lang = lang;
    p.article_id = std::string(article_id);
    p.index = static_cast<int>(i);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::string serialize_translation_response(std::span<const SentencePair> pairs,
                                           std::string_view target_lang) {
  json items = json::array();
  for (const auto& p : pairs) {
    items.push_back({{"lb", p.source_text}, {std::string(target_lang), p.target_text}});
  }
  return json{{"translation", std::move(items)}}.dump();
}

}  // namespace histkit::translate
