#pragma once

#include <string>
#include <string_view>

namespace histkit::translate {

// System prompt for sentence segmentation plus translation. `{language}` is
// replaced by the English name of the target language and `{code}` by its
// ISO code, which is also the JSON key of the translation in the response.
struct PromptTemplate {
  std::string system_text;
  std::string response_schema_hint;

  std::string render(std::string_view target_lang) const;

  static const PromptTemplate& standard();
};

bool is_supported_language(std::string_view code);

// Throws Error(kInvalidArgument) for codes other than de, fr, en.
std::string language_name(std::string_view code);

std::string build_prompt(std::string_view target_lang);

}  // namespace histkit::translate
