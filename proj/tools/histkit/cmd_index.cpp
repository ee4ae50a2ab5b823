// build-index and serve.
#include <csignal>
#include <iostream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "histkit/corpus/article.hpp"
#include "histkit/error.hpp"
#include "histkit/server/http_server.hpp"
#include "histkit/server/index.hpp"
#include "histkit/translate/sentence_pair.hpp"
#include "json.hpp"

namespace histkit::cli {
namespace {

server::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

void register_build_index(CLI::App& app) {
  struct Opts {
    std::string name = "histkit", model, pairs, articles, src_emb, tgt_emb, adapter, adapter_langs, out;
    std::string source_lang = "lb";
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("build-index", "Build a searchable index directory from pairs and embeddings");
  cmd->add_option("--pairs", o->pairs, "Sentence pairs JSONL; gives the source side and one target side")->required();
  cmd->add_option("--src-emb", o->src_emb, "Embeddings of the source sentences (.hxem)")->required();
  cmd->add_option("--tgt-emb", o->tgt_emb, "Embeddings of the target sentences (.hxem)")->required();
  cmd->add_option("--articles", o->articles, "Articles JSONL for newspaper/year metadata");
  cmd->add_option("--adapter", o->adapter, "Adapter (.hxad) to pre-apply");
  cmd->add_option("--adapter-langs", o->adapter_langs,
                  "Sides the adapter applies to (default: source, or all sides if trained on both)");
  cmd->add_option("--source-lang", o->source_lang, "Code of the source side")->capture_default_str();
  cmd->add_option("--name", o->name)->capture_default_str();
  cmd->add_option("--model", o->model, "Embedding model name recorded in the manifest");
  cmd->add_option("--out", o->out, "Index directory")->required();
  cmd->callback([o] {
    const auto pairs = translate::load_pairs(o->pairs);
    if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, o->pairs + ": no pairs");
    std::unordered_map<std::string, std::pair<std::string, int>> meta;
    if (!o->articles.empty()) {
      for (const auto& a : corpus::load_articles(o->articles)) meta[a.id] = {a.newspaper, a.year};
    }
    const std::string target_lang = pairs.front().target_lang;
    server::SideSource src{o->source_lang, {}, embed::load_matrix(o->src_emb)};
    server::SideSource tgt{target_lang, {}, embed::load_matrix(o->tgt_emb)};
    for (const auto& p : pairs) {
      if (p.target_lang != target_lang) {
        throw Error(ErrorCode::kInvalidArgument, o->pairs + ": mixes target languages " + target_lang + " and " +
                                                     p.target_lang);
      }
      server::Payload base{translate::pair_id(p), "", p.article_id, "", std::nullopt};
      if (auto it = meta.find(p.article_id); it != meta.end()) {
        base.newspaper = it->second.first;
        base.year = it->second.second;
      }
      auto lb = base;
      lb.text = p.source_text;
      auto tr = base;
      tr.text = p.target_text;
      src.payloads.push_back(std::move(lb));
      tgt.payloads.push_back(std::move(tr));
    }
    std::optional<adapt::AdapterModel> adapter;
    std::vector<std::string> langs = split_list(o->adapter_langs);
    if (!o->adapter.empty()) {
      adapter = adapt::load_adapter(o->adapter);
      if (langs.empty()) {
        langs.push_back(o->source_lang);
        if (adapter->apply_to == adapt::ApplyTo::kBoth) langs.push_back(target_lang);
      }
    }
    std::vector<server::SideSource> sides;
    sides.push_back(std::move(src));
    sides.push_back(std::move(tgt));
    const auto index = server::build_index(o->out, o->name, o->model, std::move(sides), adapter, langs);
    nlohmann::json summary = {{"name", index.name()}, {"dim", index.dim()}, {"adapter_langs", index.adapter_langs()}};
    for (const auto& s : index.sides()) summary["sides"][s.lang] = s.payloads.size();
    std::cout << summary.dump(2) << '\n';
  });
}

void register_serve(CLI::App& app) {
  struct Opts {
    std::string config, index, addr, provider, provider_file, cors_origin, model;
    std::size_t dim = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("serve", "Serve an index over HTTP");
  cmd->add_option("--config", o->config, "JSON config file (addr, index, provider, ...)");
  cmd->add_option("--index", o->index, "Index directory");
  cmd->add_option("--addr", o->addr, "host:port (default $HISTKIT_ADDR or 0.0.0.0:8080)");
  cmd->add_option("--provider", o->provider, "Query embedding provider")->check(CLI::IsMember({"stub", "remote", "file"}));
  cmd->add_option("--provider-file", o->provider_file, "JSONL for the file provider");
  cmd->add_option("--dim", o->dim, "Stub dimension (default: index dimension)");
  cmd->add_option("--model", o->model, "Provider model name");
  cmd->add_option("--cors-origin", o->cors_origin, "Allowed browser origin");
  cmd->callback([o] {
    auto cfg = server::ServerConfig::load(o->config.empty() ? std::nullopt
                                                            : std::optional<std::filesystem::path>(o->config));
    if (!o->index.empty()) cfg.index_dir = o->index;
    if (!o->addr.empty()) std::tie(cfg.host, cfg.port) = server::parse_addr(o->addr);
    if (!o->provider.empty()) cfg.provider = o->provider;
    if (!o->provider_file.empty()) cfg.provider_file = o->provider_file;
    if (!o->cors_origin.empty()) cfg.cors_origin = o->cors_origin;
    if (!o->model.empty()) cfg.stub_model = o->model;
    if (cfg.index_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "serve needs --index or \"index\" in --config");

    // Loading before binding means a broken index never accepts traffic.
    auto index = std::make_shared<const server::SearchIndex>(server::load_index(cfg.index_dir));
    ProviderOptions p;
    p.kind = cfg.provider;
    p.file = cfg.provider_file;
    p.dim = o->dim > 0 ? o->dim : index->dim();
    p.model = cfg.provider == "stub" ? cfg.stub_model : o->model;
    server::Service service(make_provider(p));
    service.set_index(index);

    server::HttpServer http(service, cfg.cors_origin);
    g_server = &http;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("serving {} ({} sides, dim {}) on {}:{}", index->name(), index->sides().size(), index->dim(),
                 cfg.host, cfg.port);
    const bool ok = http.listen(cfg.host, cfg.port);
    g_server = nullptr;
    if (!ok) throw Error(ErrorCode::kIo, "cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
  });
}

}  // namespace histkit::cli
