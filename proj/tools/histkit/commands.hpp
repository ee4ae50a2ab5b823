#pragma once

#include <memory>
#include <string>

#include "CLI11.hpp"
#include "histkit/embed/provider.hpp"

namespace histkit::cli {

// Each register_* adds one subcommand whose callback does the work and
// throws histkit::Error on failure.
void register_select(CLI::App& app);
void register_translate(CLI::App& app);
void register_build_task(CLI::App& app);
void register_embed(CLI::App& app);
void register_train(CLI::App& app);
void register_evaluate(CLI::App& app);
void register_build_index(CLI::App& app);
void register_serve(CLI::App& app);

struct ProviderOptions {
  std::string kind = "stub";
  std::size_t dim = 64;
  std::string model;  // empty: provider default
  std::string file;

  void add_to(CLI::App& cmd);
};

std::shared_ptr<embed::Provider> make_provider(const ProviderOptions& opts);

// Splits "a,b,c" and drops empty items.
std::vector<std::string> split_list(const std::string& s);

}  // namespace histkit::cli
