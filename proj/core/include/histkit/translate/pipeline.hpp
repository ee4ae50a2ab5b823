#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "histkit/corpus/article.hpp"
#include "histkit/translate/chat_client.hpp"
#include "histkit/translate/fidelity.hpp"

namespace histkit::translate {

struct TranslateConfig {
  std::filesystem::path out_dir;
  std::vector<std::string> langs{"de", "fr", "en"};
  RetryPolicy retry;
  int concurrency = 4;
  std::optional<std::filesystem::path> corrections;
};

struct GroupFailure {
  std::string article_id;
  std::string lang;
  std::string message;
};

struct LanguageSummary {
  FidelityReport fidelity;            // on the regenerated sentences, before corrections
  std::size_t pairs = 0;              // pairs written to lb_<lang>.jsonl
  std::size_t corrections_applied = 0;
  std::size_t mismatches_after_corrections = 0;
};

struct TranslateSummary {
  std::size_t requests = 0;          // HTTP attempts, retries included
  std::size_t groups_translated = 0;
  std::size_t groups_skipped = 0;    // already on disk from an earlier run
  std::vector<GroupFailure> failures;
  // (article_id, lang) groups where the model returned no sentences; usually
  // severely corrupted OCR.
  std::vector<std::pair<std::string, std::string>> flagged_empty;
  std::map<std::string, LanguageSummary> languages;
  std::optional<QuadrupletAlignment> quadruplets;  // when de, fr and en all ran
};

// Output layout under cfg.out_dir:
//   groups/<lang>/<article>.jsonl  one file per (article, language), raw pairs
//   lb_<lang>.jsonl                all pairs of a language, corrections applied
//   fidelity_<lang>.json           mismatch report for manual correction
//   failures.jsonl, summary.json
// Existing group files are reused, so a rerun only requests missing groups.
// Per-group failures are recorded and never abort the batch.
TranslateSummary translate_corpus(std::span<const corpus::Article> articles, ChatClient& client,
                                  const TranslateConfig& cfg);

std::filesystem::path group_path(const std::filesystem::path& out_dir, std::string_view lang,
                                 std::string_view article_id);

}  // namespace histkit::translate
