// Standalone mock chat-completions server for local pipeline runs.
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "mock_llm.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock chat-completions server that echoes tagged sentence translations"};
  int port = 0;
  int fail_first = 0;
  app.add_option("--port", port, "Port on 127.0.0.1 (0 = any)");
  app.add_option("--fail-first", fail_first, "Answer the first N requests with HTTP 500");
  CLI11_PARSE(app, argc, argv);

  histkit::mock::MockLlm mock;
  mock.fail_next(fail_first);
  mock.start(port);
  std::cout << mock.url() << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  std::cerr << "served " << mock.requests() << " requests\n";
  return 0;
}
