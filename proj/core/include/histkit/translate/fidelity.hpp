#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "histkit/corpus/article.hpp"
#include "histkit/translate/sentence_pair.hpp"

namespace histkit::translate {

struct Mismatch {
  std::string article_id;
  int index = 0;
  std::string regenerated;
  std::string original;  // the full source article text
};

struct FidelityReport {
  std::size_t total = 0;
  std::vector<Mismatch> mismatched;

  double mismatch_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(mismatched.size()) / static_cast<double>(total);
  }
  void merge(const FidelityReport& other);
};

// A regenerated source sentence matches when, after collapsing whitespace on
// both sides, it occurs as a contiguous substring of the article text.
FidelityReport validate_fidelity(std::span<const SentencePair> pairs,
                                 const corpus::Article& article);

struct Quadruplet {
  std::string source_text;
  std::string de;
  std::string fr;
  std::string en;
  std::string article_id;

  bool operator==(const Quadruplet&) const = default;
};

struct QuadrupletAlignment {
  std::vector<Quadruplet> quadruplets;
  std::size_t distinct_sources = 0;

  double quad_rate() const {
    return distinct_sources == 0
               ? 0.0
               : static_cast<double>(quadruplets.size()) / static_cast<double>(distinct_sources);
  }
};

// Groups by (article_id, exact source text). Only groups holding exactly one
// pair from each language become quadruplets; output is sorted by
// (article_id, source_text).
QuadrupletAlignment align_quadruplets(std::span<const SentencePair> pairs_de,
                                      std::span<const SentencePair> pairs_fr,
                                      std::span<const SentencePair> pairs_en);

// Manual fix for a regenerated source sentence. An empty `lang` applies the
// fix to every language run.
struct Correction {
  std::string article_id;
  int index = 0;
  std::string lang;
  std::string source_text;
};

// JSONL records: {"article_id", "index", "lb", "lang" (optional)}.
std::vector<Correction> load_corrections(const std::filesystem::path& path);

// Returns the number of pairs changed.
std::size_t apply_corrections(std::vector<SentencePair>& pairs,
                              std::span<const Correction> corrections);

}  // namespace histkit::translate
