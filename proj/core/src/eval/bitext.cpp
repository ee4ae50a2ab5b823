#include "histkit/eval/bitext.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "common/fs_util.hpp"
#include "common/parallel.hpp"
#include "histkit/error.hpp"
#include "histkit/eval/levenshtein.hpp"
#include "histkit/text.hpp"
#include "json.hpp"

namespace histkit::eval {
namespace {

using nlohmann::json;

std::unordered_map<std::string, std::size_t> index_ids(const std::vector<TaskItem>& items,
                                                       const char* what) {
  std::unordered_map<std::string, std::size_t> idx;
  idx.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!idx.emplace(items[i].id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bitext task: duplicate ") + what + " id \"" +
                                                   items[i].id + "\"");
    }
  }
  return idx;
}

// Gathers the rows for `items` as unit vectors in double precision.
std::vector<double> unit_rows(const std::vector<TaskItem>& items, const embed::EmbeddingMatrix& m) {
  std::vector<double> out(items.size() * m.dim());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::size_t r = m.row_of(items[i].id);
    const double norm = m.row_norm(r);
    if (norm == 0.0) throw Error(ErrorCode::kInvalidArgument, "zero embedding for id \"" + items[i].id + "\"");
    const auto row = m.row(r);
    for (std::size_t d = 0; d < m.dim(); ++d) out[i * m.dim() + d] = static_cast<double>(row[d]) / norm;
  }
  return out;
}

bool is_hit(std::size_t gold, std::size_t n, const std::vector<std::size_t>& excluded, const auto& score_of) {
  const double target = score_of(gold);
  auto ex = excluded.begin();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == gold) continue;
    while (ex != excluded.end() && *ex < j) ++ex;
    if (ex != excluded.end() && *ex == j) continue;
    if (score_of(j) >= target) return false;
  }
  return true;
}

}  // namespace

std::size_t BitextTask::n_excluded_pairs() const {
  std::size_t total = 0;
  for (const auto& e : excluded) total += e.size();
  return total;
}

void BitextTask::validate() const {
  const std::size_t n = queries.size();
  if (candidates.size() != n || gold.size() != n || excluded.size() != n || excluded_reverse.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "bitext task: queries, candidates, gold and exclusions differ in size");
  }
  index_ids(queries, "query");
  index_ids(candidates, "candidate");
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (gold[i] >= n || seen[gold[i]]) {
      throw Error(ErrorCode::kInvalidArgument, "bitext task: gold is not a bijection at query \"" + queries[i].id + "\"");
    }
    seen[gold[i]] = true;
  }
  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[gold[i]] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = excluded[i];
    const auto& r = excluded_reverse[i];
    if (!std::is_sorted(e.begin(), e.end()) || !std::is_sorted(r.begin(), r.end()) ||
        std::adjacent_find(e.begin(), e.end()) != e.end() || std::adjacent_find(r.begin(), r.end()) != r.end()) {
      throw Error(ErrorCode::kInvalidArgument, "bitext task: exclusion lists must be sorted and unique");
    }
    if ((!e.empty() && e.back() >= n) || (!r.empty() && r.back() >= n)) {
      throw Error(ErrorCode::kInvalidArgument, "bitext task: exclusion index out of range");
    }
    if (std::binary_search(e.begin(), e.end(), gold[i])) {
      throw Error(ErrorCode::kInvalidArgument, "bitext task: gold candidate excluded for \"" + queries[i].id + "\"");
    }
    if (std::binary_search(r.begin(), r.end(), inverse[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bitext task: gold query excluded for candidate \"" + candidates[i].id + "\"");
    }
  }
}

BitextTask build_bitext_task(std::span<const translate::SentencePair> pairs, const BuildTaskOptions& options) {
  BitextTask task;
  task.threshold = options.threshold;
  task.casefold = options.casefold;
  const std::size_t n = pairs.size();
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = translate::pair_id(pairs[i]);
    if (const auto [it, inserted] = seen.emplace(id, i); !inserted) {
      throw Error(ErrorCode::kInvalidArgument, "build_bitext_task: duplicate gold mapping for \"" + id + "\"");
    }
    if (task.target_lang.empty()) task.target_lang = pairs[i].target_lang;
    task.queries.push_back({id, pairs[i].source_text});
    task.candidates.push_back({id, pairs[i].target_text});
    task.gold.push_back(i);
  }

  std::vector<std::u32string> src(n);
  std::vector<std::u32string> tgt(n);
  for (std::size_t i = 0; i < n; ++i) {
    src[i] = text::alphanumeric_only(task.queries[i].text, options.casefold);
    tgt[i] = text::alphanumeric_only(task.candidates[i].text, options.casefold);
  }

  task.excluded.assign(n, {});
  parallel::for_each_index(n, options.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == task.gold[i]) continue;
      if (lev_similarity_exceeds(src[i], tgt[j], options.threshold)) task.excluded[i].push_back(j);
    }
  });
  task.excluded_reverse.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::size_t j : task.excluded[i]) task.excluded_reverse[j].push_back(i);
  }
  return task;
}

std::string task_to_json(const BitextTask& task) {
  json doc = {{"threshold", task.threshold},
              {"casefold", task.casefold},
              {"target_lang", task.target_lang},
              {"queries", json::array()},
              {"candidates", json::array()},
              {"gold", json::object()},
              {"excluded", json::object()},
              {"excluded_reverse", json::object()}};
  for (const auto& q : task.queries) doc["queries"].push_back({{"id", q.id}, {"text", q.text}});
  for (const auto& c : task.candidates) doc["candidates"].push_back({{"id", c.id}, {"text", c.text}});
  for (std::size_t i = 0; i < task.queries.size(); ++i) {
    doc["gold"][task.queries[i].id] = task.candidates[task.gold[i]].id;
    if (!task.excluded[i].empty()) {
      auto& list = doc["excluded"][task.queries[i].id] = json::array();
      for (const auto j : task.excluded[i]) list.push_back(task.candidates[j].id);
    }
    if (!task.excluded_reverse[i].empty()) {
      auto& list = doc["excluded_reverse"][task.candidates[i].id] = json::array();
      for (const auto j : task.excluded_reverse[i]) list.push_back(task.queries[j].id);
    }
  }
  return doc.dump(1);
}

BitextTask task_from_json(std::string_view json_text) {
  BitextTask task;
  try {
    const auto doc = json::parse(json_text);
    task.threshold = doc.at("threshold").get<double>();
    task.casefold = doc.value("casefold", false);
    task.target_lang = doc.value("target_lang", std::string{});
    for (const auto& q : doc.at("queries")) task.queries.push_back({q.at("id").get<std::string>(), q.value("text", "")});
    for (const auto& c : doc.at("candidates")) {
      task.candidates.push_back({c.at("id").get<std::string>(), c.value("text", "")});
    }
    const auto qidx = index_ids(task.queries, "query");
    const auto cidx = index_ids(task.candidates, "candidate");
    const auto lookup = [](const auto& idx, const std::string& id, const char* what) {
      const auto it = idx.find(id);
      if (it == idx.end()) throw Error(ErrorCode::kParse, std::string("bitext task: unknown ") + what + " id \"" + id + "\"");
      return it->second;
    };
    const std::size_t n = task.queries.size();
    task.gold.assign(n, n);
    task.excluded.assign(n, {});
    task.excluded_reverse.assign(task.candidates.size(), {});
    for (const auto& [qid, cid] : doc.at("gold").items()) {
      task.gold[lookup(qidx, qid, "query")] = lookup(cidx, cid.get<std::string>(), "candidate");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (task.gold[i] == n) throw Error(ErrorCode::kParse, "bitext task: no gold for \"" + task.queries[i].id + "\"");
    }
    if (const auto it = doc.find("excluded"); it != doc.end()) {
      for (const auto& [qid, list] : it->items()) {
        auto& dst = task.excluded[lookup(qidx, qid, "query")];
        for (const auto& cid : list) dst.push_back(lookup(cidx, cid.get<std::string>(), "candidate"));
        std::sort(dst.begin(), dst.end());
      }
    }
    if (const auto it = doc.find("excluded_reverse"); it != doc.end()) {
      for (const auto& [cid, list] : it->items()) {
        auto& dst = task.excluded_reverse[lookup(cidx, cid, "candidate")];
        for (const auto& qid : list) dst.push_back(lookup(qidx, qid.get<std::string>(), "query"));
        std::sort(dst.begin(), dst.end());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bitext task: ") + e.what());
  }
  try {
    task.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return task;
}

void save_task(const BitextTask& task, const std::filesystem::path& path) {
  const auto text = task_to_json(task);
  fs_util::write_atomically(path, [&](std::ostream& out) { out << text << '\n'; });
}

BitextTask load_task(const std::filesystem::path& path) { return task_from_json(fs_util::read_file(path)); }

EvalReport bitext_accuracy(const BitextTask& task, const embed::EmbeddingMatrix& emb_src,
                           const embed::EmbeddingMatrix& emb_tgt, unsigned threads) {
  task.validate();
  if (emb_src.dim() != emb_tgt.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "bitext_accuracy: source dim " + std::to_string(emb_src.dim()) +
                                                 " != target dim " + std::to_string(emb_tgt.dim()));
  }
  const std::size_t n = task.queries.size();
  const std::size_t dim = emb_src.dim();
  const auto q = unit_rows(task.queries, emb_src);
  const auto c = unit_rows(task.candidates, emb_tgt);

  // sims[i * n + j] = cos(query i, candidate j)
  std::vector<double> sims(n * n);
  parallel::for_each_index(n, threads, [&](std::size_t i) {
    const double* qi = q.data() + i * dim;
    for (std::size_t j = 0; j < n; ++j) {
      const double* cj = c.data() + j * dim;
      double s = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s += qi[d] * cj[d];
      sims[i * n + j] = s;
    }
  });

  std::vector<std::size_t> inverse(n);
  for (std::size_t i = 0; i < n; ++i) inverse[task.gold[i]] = i;

  std::vector<char> fwd(n, 0);
  std::vector<char> rev(n, 0);
  parallel::for_each_index(n, threads, [&](std::size_t i) {
    fwd[i] = is_hit(task.gold[i], n, task.excluded[i], [&](std::size_t j) { return sims[i * n + j]; });
    rev[i] = is_hit(inverse[i], n, task.excluded_reverse[i], [&](std::size_t k) { return sims[k * n + i]; });
  });

  EvalReport report;
  report.n_queries = n;
  report.n_excluded_pairs = task.n_excluded_pairs();
  report.hits_src_to_tgt = static_cast<std::size_t>(std::count(fwd.begin(), fwd.end(), 1));
  report.hits_tgt_to_src = static_cast<std::size_t>(std::count(rev.begin(), rev.end(), 1));
  if (n > 0) {
    report.acc_src_to_tgt = static_cast<double>(report.hits_src_to_tgt) / static_cast<double>(n);
    report.acc_tgt_to_src = static_cast<double>(report.hits_tgt_to_src) / static_cast<double>(n);
  }
  return report;
}

}  // namespace histkit::eval
