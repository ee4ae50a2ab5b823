#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace histkit::mock {

// Splits text after '.', '!' or '?' followed by whitespace.
std::vector<std::string> split_sentences(const std::string& text);

struct MockReply {
  int status = 200;
  std::string content;  // assistant message content (only used for 200)
};

struct MockRequest {
  std::string system_prompt;
  std::string user_message;
  std::string lang;  // target code recovered from the prompt, or empty
};

// Chat-completions stand-in. By default it segments the user message into
// sentences and answers {"translation": [{"lb": s, "<lang>": "[<lang>] s"}]}.
class MockLlm {
 public:
  MockLlm();
  ~MockLlm();
  MockLlm(const MockLlm&) = delete;
  MockLlm& operator=(const MockLlm&) = delete;

  // Binds 127.0.0.1 on `port` (0 picks a free one) and serves on a thread.
  void start(int port = 0);
  void stop();

  int port() const { return port_; }
  std::string url() const;  // full chat-completions endpoint

  // The next n requests get HTTP 500.
  void fail_next(int n) { fail_next_ = n; }
  // Replaces the default reply; return nullopt to fall back to it.
  void set_handler(std::function<std::optional<MockReply>(const MockRequest&)> handler);
  std::size_t requests() const { return requests_; }
  void reset_requests() { requests_ = 0; }

  static MockReply default_reply(const MockRequest& req);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> fail_next_{0};
  std::atomic<std::size_t> requests_{0};
  std::mutex mu_;
  std::function<std::optional<MockReply>(const MockRequest&)> handler_;
};

}  // namespace histkit::mock
