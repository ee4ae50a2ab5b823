// train and evaluate.
#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>

#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "histkit/adapt/trainer.hpp"
#include "histkit/error.hpp"
#include "histkit/eval/bitext.hpp"
#include "histkit/eval/modern_tasks.hpp"
#include "histkit/eval/report.hpp"
#include "histkit/translate/sentence_pair.hpp"
#include "json.hpp"

namespace histkit::cli {
namespace {

using nlohmann::json;

std::vector<std::string> pair_ids(const std::string& path) {
  std::vector<std::string> ids;
  for (const auto& p : translate::load_pairs(path)) ids.push_back(translate::pair_id(p));
  return ids;
}

adapt::PairedEmbeddings paired(const std::string& pairs_file, const embed::EmbeddingMatrix& src,
                               const embed::EmbeddingMatrix& tgt) {
  const auto ids = pair_ids(pairs_file);
  return {src.gather(ids), tgt.gather(ids)};
}

eval::Embedder make_embedder(std::shared_ptr<embed::Provider> provider, std::optional<adapt::AdapterModel> adapter) {
  return [provider, adapter](const std::vector<std::string>& texts) {
    auto vecs = provider->embed_batch(texts);
    if (adapter) {
      for (auto& v : vecs) v = adapt::apply_adapter(*adapter, std::span<const float>(v));
    }
    return vecs;
  };
}

}  // namespace

void register_train(CLI::App& app) {
  struct Opts {
    std::string objective = "contrastive", strategy = "hist";
    std::string hist, modern, base_emb, tgt_emb, modern_base_emb, modern_tgt_emb, teacher_emb, out, history;
    adapt::TrainConfig cfg;
    std::size_t epochs = 0;
    bool no_second_term = false;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("train", "Train a linear adapter over frozen embeddings");
  cmd->add_option("--objective", o->objective)->check(CLI::IsMember({"contrastive", "distill"}))->capture_default_str();
  cmd->add_option("--strategy", o->strategy)->check(CLI::IsMember({"hist", "modern", "mixed"}))->capture_default_str();
  cmd->add_option("--hist", o->hist, "Historical pairs JSONL");
  cmd->add_option("--modern", o->modern, "Modern pairs JSONL");
  cmd->add_option("--base-emb", o->base_emb, "Source-side embeddings (.hxem)")->required();
  cmd->add_option("--tgt-emb", o->tgt_emb, "Target-side embeddings (.hxem)")->required();
  cmd->add_option("--modern-base-emb", o->modern_base_emb, "Source embeddings of modern pairs (default --base-emb)");
  cmd->add_option("--modern-tgt-emb", o->modern_tgt_emb, "Target embeddings of modern pairs (default --tgt-emb)");
  cmd->add_option("--teacher-emb", o->teacher_emb,
                  "Teacher embeddings of the targets; switches to bidirectional distillation");
  cmd->add_flag("--no-second-term", o->no_second_term, "Bidirectional distillation without the target-side term");
  cmd->add_option("--out", o->out, "Adapter file (.hxad)")->required();
  cmd->add_option("--history", o->history, "Write the per-step loss history as JSON");
  cmd->add_option("--batch-size", o->cfg.batch_size)->capture_default_str();
  cmd->add_option("--epochs", o->epochs, "Default: 1 contrastive, 5 distill");
  cmd->add_option("--lr", o->cfg.learning_rate)->capture_default_str();
  cmd->add_option("--scale", o->cfg.scale, "Contrastive similarity scale")->capture_default_str();
  cmd->add_option("--seed", o->cfg.seed)->capture_default_str();
  cmd->add_flag("--symmetric", o->cfg.symmetric, "Contrastive: adapt the target side as well");
  cmd->add_option("--hist-repeat", o->cfg.hist_repeat, "Visits per hist pair per epoch")->capture_default_str();
  cmd->add_option("--modern-repeat", o->cfg.modern_repeat, "Visits per modern pair per epoch")->capture_default_str();
  cmd->callback([o] {
    o->cfg.objective = adapt::parse_objective(o->objective);
    o->cfg.strategy = adapt::parse_strategy(o->strategy);
    if (o->epochs > 0) o->cfg.epochs = o->epochs;
    o->cfg.second_term = !o->no_second_term;

    const auto base = embed::load_matrix(o->base_emb);
    const auto tgt = embed::load_matrix(o->tgt_emb);
    const auto t0 = std::chrono::steady_clock::now();
    adapt::TrainResult result;
    if (!o->teacher_emb.empty()) {
      if (o->hist.empty()) throw Error(ErrorCode::kInvalidArgument, "--teacher-emb needs --hist pairs");
      const auto teacher = embed::load_matrix(o->teacher_emb);
      const auto ids = pair_ids(o->hist);
      result = adapt::distill_bidirectional(base.gather(ids), tgt.gather(ids), teacher.gather(ids), o->cfg);
    } else {
      const bool need_hist = o->cfg.strategy != adapt::Strategy::kModern;
      const bool need_modern = o->cfg.strategy != adapt::Strategy::kHist;
      if (need_hist && o->hist.empty()) throw Error(ErrorCode::kInvalidArgument, "strategy needs --hist");
      if (need_modern && o->modern.empty()) throw Error(ErrorCode::kInvalidArgument, "strategy needs --modern");
      const embed::EmbeddingMatrix empty(base.dim(), {}, {});
      const auto hist = need_hist ? paired(o->hist, base, tgt) : adapt::PairedEmbeddings{empty, empty};
      adapt::PairedEmbeddings modern{empty, empty};
      if (need_modern) {
        const auto mb = o->modern_base_emb.empty() ? base : embed::load_matrix(o->modern_base_emb);
        const auto mt = o->modern_tgt_emb.empty() ? tgt : embed::load_matrix(o->modern_tgt_emb);
        modern = paired(o->modern, mb, mt);
      }
      result = adapt::train(hist, modern, o->cfg);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    adapt::save_adapter(result.model, o->out);
    const auto means = result.epoch_means();
    if (!o->history.empty()) {
      const json h = {{"loss", result.loss_history}, {"epoch_ends", result.epoch_ends}, {"epoch_means", means}};
      std::ofstream out(o->history);
      out << h.dump() << '\n';
      if (!out) throw Error(ErrorCode::kIo, "cannot write " + o->history);
    }
    std::cout << json({{"steps", result.loss_history.size()},
                       {"epochs", result.model.epochs},
                       {"epoch_mean_loss", means},
                       {"seconds", seconds},
                       {"objective", adapt::to_string(result.model.objective)},
                       {"strategy", adapt::to_string(result.model.strategy)},
                       {"apply_to", adapt::to_string(result.model.apply_to)}})
                     .dump(2)
              << '\n';
  });
}

void register_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "Run an evaluation task");
  cmd->require_subcommand(1);

  struct BitextOpts {
    std::string task, src_emb, tgt_emb, adapter, out;
    unsigned threads = 1;
  };
  auto b = std::make_shared<BitextOpts>();
  auto* bitext = cmd->add_subcommand("bitext", "Bidirectional bitext mining accuracy");
  bitext->add_option("--task", b->task, "Task JSON from build-task")->required();
  bitext->add_option("--src-emb", b->src_emb, "Query embeddings (.hxem)")->required();
  bitext->add_option("--tgt-emb", b->tgt_emb, "Candidate embeddings (.hxem)")->required();
  bitext->add_option("--adapter", b->adapter, "Adapter applied to the source side (both if trained so)");
  bitext->add_option("--out", b->out, "Report JSON (default stdout only)");
  bitext->add_option("--threads", b->threads)->capture_default_str();
  bitext->callback([b] {
    const auto task = eval::load_task(b->task);
    auto src = embed::load_matrix(b->src_emb);
    auto tgt = embed::load_matrix(b->tgt_emb);
    if (!b->adapter.empty()) {
      const auto a = adapt::load_adapter(b->adapter);
      src = adapt::apply_adapter(a, src);
      if (a.apply_to == adapt::ApplyTo::kBoth) tgt = adapt::apply_adapter(a, tgt);
    }
    const auto report = eval::bitext_accuracy(task, src, tgt, b->threads);
    eval::ReportConfig rc{"bitext", b->src_emb, b->tgt_emb, b->adapter, task.threshold, task.casefold, std::nullopt};
    const auto text = eval::bitext_report_json(report, rc);
    if (!b->out.empty()) eval::write_report(b->out, text);
    std::cout << text << '\n';
  });

  struct ModernOpts {
    std::string input, adapter, out, labels, label_template = std::string(eval::kDefaultTopicTemplate);
    ProviderOptions provider;
  };
  auto t = std::make_shared<ModernOpts>();
  auto* triplet = cmd->add_subcommand("triplet", "Triplet accuracy on {anchor, positive, negative} JSONL");
  triplet->add_option("--triplets", t->input)->required();
  triplet->add_option("--adapter", t->adapter);
  triplet->add_option("--out", t->out);
  t->provider.add_to(*triplet);
  triplet->callback([t] {
    const auto triplets = eval::load_triplets(t->input);
    std::optional<adapt::AdapterModel> a;
    if (!t->adapter.empty()) a = adapt::load_adapter(t->adapter);
    const double acc = eval::triplet_accuracy(triplets, make_embedder(make_provider(t->provider), a));
    eval::ReportConfig rc{"triplet", t->provider.kind, "", t->adapter, std::nullopt, std::nullopt, std::nullopt};
    const auto text = eval::scalar_report_json("accuracy", acc, triplets.size(), rc);
    if (!t->out.empty()) eval::write_report(t->out, text);
    std::cout << text << '\n';
  });

  auto z = std::make_shared<ModernOpts>();
  auto* zeroshot = cmd->add_subcommand("zeroshot", "Zero-shot topic classification on {text, label} JSONL");
  zeroshot->add_option("--texts", z->input)->required();
  zeroshot->add_option("--labels", z->labels, "Comma-separated label set (default: labels in the data, sorted)");
  zeroshot->add_option("--template", z->label_template, "Must contain {label}")->capture_default_str();
  zeroshot->add_option("--adapter", z->adapter);
  zeroshot->add_option("--out", z->out);
  z->provider.add_to(*zeroshot);
  zeroshot->callback([z] {
    const auto texts = eval::load_labeled_texts(z->input);
    std::vector<std::string> labels = split_list(z->labels);
    if (labels.empty()) {
      for (const auto& t : texts) labels.push_back(t.label);
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    }
    std::optional<adapt::AdapterModel> a;
    if (!z->adapter.empty()) a = adapt::load_adapter(z->adapter);
    const auto res = eval::zero_shot_classify(texts, labels, z->label_template,
                                              make_embedder(make_provider(z->provider), a));
    eval::ReportConfig rc{"zeroshot", z->provider.kind, "", z->adapter, std::nullopt, std::nullopt, z->label_template};
    const auto text = eval::scalar_report_json("accuracy", res.accuracy, texts.size(), rc);
    if (!z->out.empty()) eval::write_report(z->out, text);
    std::cout << text << '\n';
  });
}

}  // namespace histkit::cli
