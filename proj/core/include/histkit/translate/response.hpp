#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "histkit/error.hpp"
#include "histkit/translate/sentence_pair.hpp"

namespace histkit::translate {

// Raised when a model response does not follow the requested format.
// `item_index` is set when the failure is inside one "translation" entry.
class ResponseParseError : public Error {
 public:
  ResponseParseError(std::optional<std::size_t> item_index, const std::string& message)
      : Error(ErrorCode::kParse, message), item_index_(item_index) {}

  std::optional<std::size_t> item_index() const noexcept { return item_index_; }

 private:
  std::optional<std::size_t> item_index_;
};

// Accepts {"translation": [{"lb": ..., "<lang>": ...}, ...]}, optionally wrapped
// in a Markdown code fence. Items must carry exactly those two keys with
// nonempty string values. Pairs are indexed in array order.
std::vector<SentencePair> parse_translation_response(std::string_view body,
                                                     std::string_view target_lang,
                                                     std::string_view article_id = {});

std::string serialize_translation_response(std::span<const SentencePair> pairs,
                                           std::string_view target_lang);

}  // namespace histkit::translate
