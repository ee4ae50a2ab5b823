#include "histkit/translate/prompt.hpp"

#include "histkit/error.hpp"

namespace histkit::translate {
namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

bool is_supported_language(std::string_view code) {
  return code == "de" || code == "fr" || code == "en";
}

std::string language_name(std::string_view code) {
  if (code == "de") return "German";
  if (code == "fr") return "French";
  if (code == "en") return "English";
  throw Error(ErrorCode::kInvalidArgument,
              "unsupported target language \"" + std::string(code) + "\" (expected de, fr or en)");
}

const PromptTemplate& PromptTemplate::standard() {
  static const PromptTemplate kStandard{
      .system_text =
          "You are a professional translator specializing in the translation of historical "
          "Luxembourgish newspaper articles into modern Standard {language}.\n"
          "\n"
          "Your task is to translate paragraphs from such newspapers, provided to you by the "
          "user. These paragraphs may contain old spellings, outdated expressions, and likely a "
          "lot of OCR errors, as they are extracted from 19th-century LB newspapers. Please "
          "translate each sentence individually into modern Standard {language}. Prioritize "
          "retaining the original meaning, expressions, and any nuanced tone in each "
          "translation, even if the result sounds somewhat unconventional or even bad in "
          "{language}. If an expression is ambiguous due to its historical nature or OCR errors, "
          "attempt to reconstruct the most probable meaning based on linguistic context. Ensure "
          "that all punctuation and whitespace is preserved exactly. Do not add any extra "
          "formatting such as backticks, markdown, or additional symbols.\n"
          "\n",
      .response_schema_hint =
          "Please return the source sentences and your translations in the following format as "
          "JSON:\n"
          "{\"translation\": [\n"
          "{\"lb\": \"lb_sent1\", \"{code}\": \"{code}_sent1\"},\n"
          "{\"lb\": \"lb_sent2\", \"{code}\": \"{code}_sent2\"},\n"
          "{\"lb\": \"lb_sent3\", \"{code}\": \"{code}_sent3\"}, ...]}",
  };
  return kStandard;
}

std::string PromptTemplate::render(std::string_view target_lang) const {
  const std::string name = language_name(target_lang);
  std::string out = system_text + response_schema_hint;
  replace_all(out, "{language}", name);
  replace_all(out, "{code}", target_lang);
  return out;
}

std::string build_prompt(std::string_view target_lang) {
  return PromptTemplate::standard().render(target_lang);
}

}  // namespace histkit::translate
