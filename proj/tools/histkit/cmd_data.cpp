// select, translate, build-task and embed.
#include <fstream>
#include <iostream>

#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "histkit/corpus/article.hpp"
#include "histkit/corpus/kmeans.hpp"
#include "histkit/corpus/selection.hpp"
#include "histkit/error.hpp"
#include "histkit/eval/bitext.hpp"
#include "histkit/translate/chat_client.hpp"
#include "histkit/translate/pipeline.hpp"
#include "histkit/translate/sentence_pair.hpp"
#include "json.hpp"

namespace histkit::cli {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  return out;
}

void ProviderOptions::add_to(CLI::App& cmd) {
  cmd.add_option("--provider", kind, "Embedding provider")->check(CLI::IsMember({"stub", "remote", "file"}));
  cmd.add_option("--dim", dim, "Stub provider dimension");
  cmd.add_option("--model", model, "Model name (stub seed / remote model)");
  cmd.add_option("--provider-file", file, "JSONL {text, embedding} for the file provider");
}

std::shared_ptr<embed::Provider> make_provider(const ProviderOptions& opts) {
  if (opts.kind == "stub") return std::make_shared<embed::StubProvider>(opts.dim, opts.model.empty() ? "stub" : opts.model);
  if (opts.kind == "remote") {
    auto cfg = embed::RemoteProviderConfig::from_env();
    if (!opts.model.empty()) cfg.model = opts.model;
    return std::make_shared<embed::RemoteProvider>(cfg);
  }
  if (opts.file.empty()) throw Error(ErrorCode::kInvalidArgument, "--provider file needs --provider-file");
  return std::make_shared<embed::FileProvider>(opts.file, opts.model.empty() ? "file" : opts.model);
}

void register_select(CLI::App& app) {
  struct Opts {
    std::string articles, out, assignments;
    corpus::SelectionConfig cfg;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("select", "Cluster topic vectors and pick representative articles");
  cmd->add_option("--in,--articles", o->articles, "Articles JSONL with topic vectors")->required();
  cmd->add_option("--out", o->out, "Selected articles JSONL")->required();
  cmd->add_option("--assignments", o->assignments, "Also write cluster assignments JSONL");
  cmd->add_option("--k", o->cfg.k, "Number of clusters")->capture_default_str();
  cmd->add_option("--min-cluster-size", o->cfg.min_cluster_size, "Keep clusters strictly larger than this")
      ->capture_default_str();
  cmd->add_option("--min-sent,--min-sentences", o->cfg.min_sentences)->capture_default_str();
  cmd->add_option("--max-sent,--max-sentences", o->cfg.max_sentences)->capture_default_str();
  cmd->add_option("--extra", o->cfg.extra_samples_per_cluster, "Extra random articles per cluster")
      ->capture_default_str();
  cmd->add_option("--seed", o->cfg.seed)->capture_default_str();
  cmd->add_option("--max-iters", o->cfg.max_iters)->capture_default_str();
  cmd->callback([o] {
    o->cfg.validate();
    const auto articles = corpus::load_articles(o->articles);
    const auto clustering = corpus::cluster_articles(articles, o->cfg.k, o->cfg.seed, o->cfg.max_iters);
    const auto selected = corpus::select_articles(articles, clustering.assignments, o->cfg);
    corpus::save_articles(o->out, selected);
    if (!o->assignments.empty()) {
      std::ofstream out(o->assignments);
      for (const auto& a : clustering.assignments) {
        out << json({{"article_id", a.article_id}, {"cluster", a.cluster_id}, {"distance", a.distance}}).dump()
            << '\n';
      }
    }
    const json summary = {{"articles", articles.size()},
                          {"clustered", clustering.assignments.size()},
                          {"kept_clusters", corpus::count_kept_clusters(clustering.assignments, o->cfg.min_cluster_size)},
                          {"selected", selected.size()},
                          {"iterations", clustering.sse_history.size()}};
    std::cout << summary.dump(2) << '\n';
  });
}

void register_translate(CLI::App& app) {
  struct Opts {
    std::string articles, out, langs = "de,fr,en", corrections, url, key, model;
    int retries = 3;
    int concurrency = 4;
    int backoff_ms = 500;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("translate", "Regenerate and translate articles through a chat model");
  cmd->add_option("--in,--articles", o->articles, "Articles JSONL")->required();
  cmd->add_option("--out", o->out, "Output directory")->required();
  cmd->add_option("--langs", o->langs, "Target languages")->capture_default_str();
  cmd->add_option("--retries", o->retries)->capture_default_str();
  cmd->add_option("--concurrency", o->concurrency)->capture_default_str();
  cmd->add_option("--backoff-ms", o->backoff_ms, "Initial retry backoff")->capture_default_str();
  cmd->add_option("--corrections", o->corrections, "Manual corrections JSONL");
  cmd->add_option("--llm-url", o->url, "Chat-completions endpoint (default $HISTKIT_LLM_URL)");
  cmd->add_option("--llm-key", o->key, "API key (default $HISTKIT_LLM_KEY)");
  cmd->add_option("--llm-model", o->model, "Model (default $HISTKIT_LLM_MODEL or gpt-4o)");
  cmd->callback([o] {
    auto chat = translate::HttpChatConfig::from_env();
    if (!o->url.empty()) chat.url = o->url;
    if (!o->key.empty()) chat.api_key = o->key;
    if (!o->model.empty()) chat.model = o->model;
    translate::HttpChatClient client(chat);

    translate::TranslateConfig cfg;
    cfg.out_dir = o->out;
    cfg.langs = split_list(o->langs);
    cfg.retry.retries = o->retries;
    cfg.retry.initial_backoff = std::chrono::milliseconds(o->backoff_ms);
    cfg.concurrency = o->concurrency;
    if (!o->corrections.empty()) cfg.corrections = o->corrections;

    const auto articles = corpus::load_articles(o->articles);
    const auto s = translate::translate_corpus(articles, client, cfg);
    json langs = json::object();
    for (const auto& [lang, ls] : s.languages) {
      langs[lang] = {{"pairs", ls.pairs},
                     {"mismatch_rate", ls.fidelity.mismatch_rate()},
                     {"mismatched", ls.fidelity.mismatched.size()},
                     {"corrections_applied", ls.corrections_applied}};
    }
    json summary = {{"requests", s.requests},
                    {"groups_translated", s.groups_translated},
                    {"groups_skipped", s.groups_skipped},
                    {"failures", s.failures.size()},
                    {"languages", langs}};
    if (s.quadruplets) summary["quad_rate"] = s.quadruplets->quad_rate();
    std::cout << summary.dump(2) << '\n';
    if (!s.failures.empty()) spdlog::warn("{} groups failed; see {}/failures.jsonl", s.failures.size(), o->out);
  });
}

void register_build_task(CLI::App& app) {
  struct Opts {
    std::string pairs, out;
    eval::BuildTaskOptions opts;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("build-task", "Build a bitext mining task with near-duplicate exclusions");
  cmd->add_option("--pairs", o->pairs, "Sentence pairs JSONL")->required();
  cmd->add_option("--out", o->out, "Task JSON")->required();
  cmd->add_option("--threshold", o->opts.threshold, "Levenshtein similarity cut-off")->capture_default_str();
  cmd->add_flag("--casefold", o->opts.casefold, "Compare case-insensitively");
  cmd->add_option("--threads", o->opts.threads)->capture_default_str();
  cmd->callback([o] {
    const auto pairs = translate::load_pairs(o->pairs);
    const auto task = eval::build_bitext_task(pairs, o->opts);
    eval::save_task(task, o->out);
    std::cout << json({{"queries", task.queries.size()}, {"excluded_pairs", task.n_excluded_pairs()},
                       {"target_lang", task.target_lang}})
                     .dump(2)
              << '\n';
  });
}

void register_embed(CLI::App& app) {
  struct Opts {
    std::string input, field = "lb", out;
    std::size_t batch_size = 64;
    ProviderOptions provider;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("embed", "Embed sentences into an HXEM matrix");
  cmd->add_option("--in,--input", o->input, "Pairs JSONL (fields lb/tgt) or {id, text} JSONL (field text)")->required();
  cmd->add_option("--field", o->field, "Which text to embed")
      ->check(CLI::IsMember({"lb", "tgt", "text"}))
      ->capture_default_str();
  cmd->add_option("--out", o->out, "Output .hxem")->required();
  cmd->add_option("--batch-size", o->batch_size)->capture_default_str();
  o->provider.add_to(*cmd);
  cmd->callback([o] {
    std::vector<std::string> ids, texts;
    if (o->field == "text") {
      std::ifstream in(o->input);
      if (!in) throw Error(ErrorCode::kIo, "cannot open " + o->input);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
          const auto j = json::parse(line);
          ids.push_back(j.at("id").get<std::string>());
          texts.push_back(j.at("text").get<std::string>());
        } catch (const json::exception& e) {
          throw Error(ErrorCode::kParse, o->input + ": line " + std::to_string(line_no) + ": " + e.what());
        }
      }
    } else {
      for (const auto& p : translate::load_pairs(o->input)) {
        ids.push_back(translate::pair_id(p));
        texts.push_back(o->field == "lb" ? p.source_text : p.target_text);
      }
    }
    auto provider = make_provider(o->provider);
    const auto m = embed::embed_texts(*provider, texts, o->batch_size, ids);
    embed::save_matrix(m, o->out);
    std::cout << json({{"rows", m.size()}, {"dim", m.dim()}, {"model", provider->model_name()}}).dump(2) << '\n';
  });
}

}  // namespace histkit::cli
