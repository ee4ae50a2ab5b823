#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "histkit/embed/matrix.hpp"
#include "histkit/translate/sentence_pair.hpp"

namespace histkit::eval {

struct TaskItem {
  std::string id;
  std::string text;

  bool operator==(const TaskItem&) const = default;
};

// Bitext mining task. Queries are source-language sentences, candidates their
// translations. gold[i] is the candidate index of query i (a bijection).
// excluded[i] lists candidate indices filtered out for query i;
// excluded_reverse[j] lists query indices filtered out when candidate j is
// the query. Both lists are sorted and never contain the gold partner.
struct BitextTask {
  std::vector<TaskItem> queries;
  std::vector<TaskItem> candidates;
  std::vector<std::size_t> gold;
  std::vector<std::vector<std::size_t>> excluded;
  std::vector<std::vector<std::size_t>> excluded_reverse;
  double threshold = 0.85;
  bool casefold = false;
  std::string target_lang;

  std::size_t n_excluded_pairs() const;
  // Checks sizes, the bijection and the exclusion invariants.
  void validate() const;

  bool operator==(const BitextTask&) const = default;
};

struct BuildTaskOptions {
  double threshold = 0.85;
  bool casefold = false;
  unsigned threads = 1;
};

// Query i is pair i's source sentence and candidate i its translation, both
// with id pair_id(pair). A non-gold candidate whose Levenshtein similarity to
// the query exceeds the threshold is excluded for that query; the reverse
// direction gets the transposed exclusions. Duplicate pair ids throw.
BitextTask build_bitext_task(std::span<const translate::SentencePair> pairs,
                             const BuildTaskOptions& options = {});

// JSON: {"threshold", "casefold", "target_lang", "queries": [{"id","text"}],
// "candidates": [...], "gold": {query_id: candidate_id},
// "excluded": {query_id: [candidate_id]}, "excluded_reverse": {candidate_id: [query_id]}}
void save_task(const BitextTask& task, const std::filesystem::path& path);
BitextTask load_task(const std::filesystem::path& path);
std::string task_to_json(const BitextTask& task);
BitextTask task_from_json(std::string_view json_text);

struct EvalReport {
  double acc_src_to_tgt = 0.0;
  double acc_tgt_to_src = 0.0;
  std::size_t n_queries = 0;
  std::size_t n_excluded_pairs = 0;
  std::size_t hits_src_to_tgt = 0;
  std::size_t hits_tgt_to_src = 0;

  double acc_avg() const { return (acc_src_to_tgt + acc_tgt_to_src) / 2.0; }
};

// A query scores a hit when the cosine similarity of its gold partner is
// strictly greater than that of every remaining (non-excluded) candidate;
// ties count as misses. Run in both directions. Missing ids throw
// Error(kNotFound).
EvalReport bitext_accuracy(const BitextTask& task, const embed::EmbeddingMatrix& emb_src,
                           const embed::EmbeddingMatrix& emb_tgt, unsigned threads = 1);

}  // namespace histkit::eval
