#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "histkit/corpus/article.hpp"
#include "histkit/retry.hpp"

namespace histkit::translate {

// One system + user turn against a chat-completion model. Implementations
// must be safe to call from several threads at once.
class ChatClient {
 public:
  virtual ~ChatClient() = default;

  // Returns the assistant message content. Transport failures and non-2xx
  // statuses throw Error(kTransport).
  virtual std::string complete(const std::string& system_prompt, const std::string& user_message) = 0;
};

struct HttpChatConfig {
  std::string url;  // full chat-completions endpoint
  std::string api_key;
  std::string model = "gpt-4o";
  double temperature = 0.0;
  bool json_response = true;
  std::chrono::seconds timeout{120};

  // HISTKIT_LLM_URL, HISTKIT_LLM_KEY, and optionally HISTKIT_LLM_MODEL.
  static HttpChatConfig from_env();
};

// OpenAI-compatible chat-completions client.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);

  std::string complete(const std::string& system_prompt, const std::string& user_message) override;

  const HttpChatConfig& config() const { return config_; }

 private:
  HttpChatConfig config_;
};

// Sends the translation prompt with the article's sentences joined by single
// spaces. Returns the first response body that parses as a translation
// response; parse and transport failures are retried with exponential
// backoff. When attempts run out, rethrows the last failure's code with the
// attempt count in the message.
std::string request_translation(const corpus::Article& article, std::string_view target_lang,
                                ChatClient& client, const RetryPolicy& retry);

}  // namespace histkit::translate
