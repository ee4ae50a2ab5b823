#include "histkit/translate/pipeline.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "common/fs_util.hpp"
#include "histkit/error.hpp"
#include "histkit/translate/prompt.hpp"
#include "histkit/translate/response.hpp"
#include "json.hpp"

namespace histkit::translate {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CountingClient : public ChatClient {
 public:
  explicit CountingClient(ChatClient& inner) : inner_(inner) {}

  std::string complete(const std::string& system_prompt, const std::string& user_message) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.complete(system_prompt, user_message);
  }

  std::size_t calls() const { return calls_.load(); }

 private:
  ChatClient& inner_;
  std::atomic<std::size_t> calls_{0};
};

struct Task {
  const corpus::Article* article;
  std::string lang;
};

struct Outcome {
  Task task;
  std::optional<std::vector<SentencePair>> pairs;
  std::string error;
};

json mismatch_json(const Mismatch& m) {
  return {{"article_id", m.article_id},
          {"index", m.index},
          {"regenerated", m.regenerated},
          {"original", m.original}};
}

}  // namespace

fs::path group_path(const fs::path& out_dir, std::string_view lang, std::string_view article_id) {
  return out_dir / "groups" / std::string(lang) / (fs_util::encode_filename(article_id) + ".jsonl");
}

TranslateSummary translate_corpus(std::span<const corpus::Article> articles, ChatClient& client,
                                  const TranslateConfig& cfg) {
  if (cfg.out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "translate: no output directory");
  if (cfg.concurrency < 1) throw Error(ErrorCode::kInvalidArgument, "translate: concurrency must be >= 1");
  for (const auto& lang : cfg.langs) language_name(lang);
  std::set<std::string_view> ids;
  for (const auto& a : articles) {
    if (!ids.insert(a.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "translate: duplicate article id \"" + a.id + "\"");
    }
  }
  std::vector<Correction> corrections;
  if (cfg.corrections) corrections = load_corrections(*cfg.corrections);

  for (const auto& lang : cfg.langs) fs::create_directories(cfg.out_dir / "groups" / lang);

  TranslateSummary summary;
  std::vector<Task> pending;
  for (const auto& lang : cfg.langs) {
    for (const auto& a : articles) {
      if (fs::exists(group_path(cfg.out_dir, lang, a.id))) {
        ++summary.groups_skipped;
      } else {
        pending.push_back({&a, lang});
      }
    }
  }

  CountingClient counting(client);
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Outcome> ready;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      Outcome out{pending[i], std::nullopt, {}};
      try {
        const std::string body = request_translation(*out.task.article, out.task.lang, counting, cfg.retry);
        out.pairs = parse_translation_response(body, out.task.lang, out.task.article->id);
      } catch (const std::exception& e) {
        out.error = e.what();
      }
      {
        std::lock_guard lock(mu);
        ready.push_back(std::move(out));
      }
      cv.notify_one();
    }
  };

  {
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.concurrency), pending.size());
    std::vector<std::jthread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);

    // This thread is the only writer.
    for (std::size_t received = 0; received < pending.size(); ++received) {
      Outcome out;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return !ready.empty(); });
        out = std::move(ready.front());
        ready.pop_front();
      }
      const auto& article_id = out.task.article->id;
      if (!out.pairs) {
        spdlog::warn("translate: {} [{}] failed: {}", article_id, out.task.lang, out.error);
        summary.failures.push_back({article_id, out.task.lang, out.error});
        continue;
      }
      try {
        save_pairs(group_path(cfg.out_dir, out.task.lang, article_id), *out.pairs);
        ++summary.groups_translated;
      } catch (const Error& e) {
        summary.failures.push_back({article_id, out.task.lang, e.what()});
      }
    }
  }
  summary.requests = counting.calls();

  std::map<std::string, std::vector<SentencePair>> consolidated;
  for (const auto& lang : cfg.langs) {
    LanguageSummary ls;
    std::vector<SentencePair> all;
    for (const auto& a : articles) {
      const auto path = group_path(cfg.out_dir, lang, a.id);
      if (!fs::exists(path)) continue;
      auto pairs = load_pairs(path);
      if (pairs.empty()) summary.flagged_empty.emplace_back(a.id, lang);
      ls.fidelity.merge(validate_fidelity(pairs, a));
      ls.corrections_applied += apply_corrections(pairs, corrections);
      ls.mismatches_after_corrections += validate_fidelity(pairs, a).mismatched.size();
      all.insert(all.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
    }
    ls.pairs = all.size();
    save_pairs(cfg.out_dir / ("lb_" + lang + ".jsonl"), all);

    json report = {{"lang", lang},
                   {"total", ls.fidelity.total},
                   {"mismatched", ls.fidelity.mismatched.size()},
                   {"mismatch_rate", ls.fidelity.mismatch_rate()},
                   {"corrections_applied", ls.corrections_applied},
                   {"mismatches_after_corrections", ls.mismatches_after_corrections},
                   {"mismatches", json::array()}};
    for (const auto& m : ls.fidelity.mismatched) report["mismatches"].push_back(mismatch_json(m));
    fs_util::write_atomically(cfg.out_dir / ("fidelity_" + lang + ".json"),
                              [&](std::ostream& out) { out << report.dump(2) << '\n'; });
    summary.languages.emplace(lang, std::move(ls));
    consolidated.emplace(lang, std::move(all));
  }

  if (consolidated.contains("de") && consolidated.contains("fr") && consolidated.contains("en")) {
    summary.quadruplets = align_quadruplets(consolidated["de"], consolidated["fr"], consolidated["en"]);
    fs_util::write_atomically(cfg.out_dir / "quadruplets.jsonl", [&](std::ostream& out) {
      for (const auto& q : summary.quadruplets->quadruplets) {
        out << json{{"article_id", q.article_id}, {"lb", q.source_text}, {"de", q.de}, {"fr", q.fr}, {"en", q.en}}.dump()
            << '\n';
      }
    });
  }

  fs_util::write_atomically(cfg.out_dir / "failures.jsonl", [&](std::ostream& out) {
    for (const auto& f : summary.failures) {
      out << json{{"article_id", f.article_id}, {"lang", f.lang}, {"error", f.message}}.dump() << '\n';
    }
  });

  json js = {{"requests", summary.requests},
             {"groups_translated", summary.groups_translated},
             {"groups_skipped", summary.groups_skipped},
             {"failures", summary.failures.size()},
             {"flagged_empty", json::array()},
             {"languages", json::object()}};
  for (const auto& [article_id, lang] : summary.flagged_empty) {
    js["flagged_empty"].push_back({{"article_id", article_id}, {"lang", lang}});
  }
  for (const auto& [lang, ls] : summary.languages) {
    js["languages"][lang] = {{"pairs", ls.pairs},
                             {"regenerated_checked", ls.fidelity.total},
                             {"mismatched", ls.fidelity.mismatched.size()},
                             {"mismatch_rate", ls.fidelity.mismatch_rate()},
                             {"corrections_applied", ls.corrections_applied},
                             {"mismatches_after_corrections", ls.mismatches_after_corrections}};
  }
  if (summary.quadruplets) {
    js["quadruplets"] = summary.quadruplets->quadruplets.size();
    js["distinct_sources"] = summary.quadruplets->distinct_sources;
    js["quad_rate"] = summary.quadruplets->quad_rate();
  }
  fs_util::write_atomically(cfg.out_dir / "summary.json",
                            [&](std::ostream& out) { out << js.dump(2) << '\n'; });
  return summary;
}

}  // namespace histkit::translate
