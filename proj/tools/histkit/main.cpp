#include <iostream>

#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "histkit/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"histkit: historical Luxembourgish cross-lingual retrieval toolkit"};
  app.require_subcommand(1);
  app.add_flag_callback("-v,--verbose", [] { spdlog::set_level(spdlog::level::debug); }, "Debug logging");

  histkit::cli::register_select(app);
  histkit::cli::register_translate(app);
  histkit::cli::register_build_task(app);
  histkit::cli::register_embed(app);
  histkit::cli::register_train(app);
  histkit::cli::register_evaluate(app);
  histkit::cli::register_build_index(app);
  histkit::cli::register_serve(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const histkit::Error& e) {
    std::cerr << "error (" << histkit::to_string(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
