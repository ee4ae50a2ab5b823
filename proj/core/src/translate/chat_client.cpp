#include "histkit/translate/chat_client.hpp"

#include <cstdlib>
#include <thread>

#include "common/http.hpp"
#include "histkit/error.hpp"
#include "histkit/translate/prompt.hpp"
#include "histkit/translate/response.hpp"
#include "json.hpp"

namespace histkit::translate {
namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : std::move(fallback);
}

}  // namespace

HttpChatConfig HttpChatConfig::from_env() {
  HttpChatConfig cfg;
  cfg.url = env_or("HISTKIT_LLM_URL", "");
  cfg.api_key = env_or("HISTKIT_LLM_KEY", "");
  cfg.model = env_or("HISTKIT_LLM_MODEL", cfg.model);
  return cfg;
}

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "chat client: no endpoint URL (set HISTKIT_LLM_URL)");
  }
  http::parse_endpoint(config_.url);
}

std::string HttpChatClient::complete(const std::string& system_prompt,
                                     const std::string& user_message) {
  nlohmann::json request = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages",
       {{{"role", "system"}, {"content", system_prompt}},
        {{"role", "user"}, {"content", user_message}}}},
  };
  if (config_.json_response) request["response_format"] = {{"type", "json_object"}};

  const auto res = http::post_json(http::parse_endpoint(config_.url), request.dump(),
                                   config_.api_key, config_.timeout);
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::kTransport, "chat endpoint returned HTTP " + std::to_string(res.status));
  }
  try {
    const auto doc = nlohmann::json::parse(res.body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed chat completion envelope: ") + e.what());
  }
}

std::string request_translation(const corpus::Article& article, std::string_view target_lang,
                                 ChatClient& client, const RetryPolicy& retry) {
  if (retry.retries < 0) throw Error(ErrorCode::kInvalidArgument, "retries must be >= 0");
  if (article.sentences.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "article \"" + article.id + "\" has no sentences");
  }
  const std::string system_prompt = build_prompt(target_lang);
  const std::string user_message = corpus::joined_text(article);

  const int attempts = retry.retries + 1;
  ErrorCode last_code = ErrorCode::kTransport;
  std::string last_message;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(retry.backoff_before(attempt));
    try {
      std::string body = client.complete(system_prompt, user_message);
      parse_translation_response(body, target_lang, article.id);
      return body;
    } catch (const Error& e) {
      last_code = e.code();
      last_message = e.what();
    }
  }
  throw Error(last_code, "translation of \"" + article.id + "\" into " + std::string(target_lang) +
                             " failed after " + std::to_string(attempts) +
                             " attempts: " + last_message);
}

}  // namespace histkit::translate
