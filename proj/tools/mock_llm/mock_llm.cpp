#include "mock_llm.hpp"

#include <cctype>
#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace histkit::mock {

using nlohmann::json;

struct MockLlm::Impl {
  httplib::Server server;
};

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    cur.push_back(text[i]);
    const char c = text[i];
    const bool end = (c == '.' || c == '!' || c == '?') &&
                     (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (end) {
      out.push_back(cur);
      cur.clear();
      while (i + 1 < text.size() && std::isspace(static_cast<unsigned char>(text[i + 1]))) ++i;
    }
  }
  if (cur.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(cur);
  return out;
}

MockReply MockLlm::default_reply(const MockRequest& req) {
  if (req.lang.empty()) return {400, ""};
  json items = json::array();
  for (const auto& s : split_sentences(req.user_message)) {
    items.push_back({{"lb", s}, {req.lang, "[" + req.lang + "] " + s}});
  }
  return {200, json({{"translation", items}}).dump()};
}

MockLlm::MockLlm() : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    if (fail_next_ > 0) {
      --fail_next_;
      res.status = 500;
      res.set_content(R"({"error":"injected failure"})", "application/json");
      return;
    }
    MockRequest mr;
    try {
      const auto body = json::parse(req.body);
      for (const auto& m : body.at("messages")) {
        const auto role = m.at("role").get<std::string>();
        if (role == "system") mr.system_prompt = m.at("content").get<std::string>();
        if (role == "user") mr.user_message = m.at("content").get<std::string>();
      }
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json({{"error", e.what()}}).dump(), "application/json");
      return;
    }
    for (const char* code : {"de", "fr", "en"}) {
      if (mr.system_prompt.find(std::string("\"") + code + "_sent1\"") != std::string::npos) mr.lang = code;
    }
    std::optional<MockReply> reply;
    {
      std::lock_guard lock(mu_);
      if (handler_) reply = handler_(mr);
    }
    if (!reply) reply = default_reply(mr);
    res.status = reply->status;
    if (reply->status != 200) {
      res.set_content(R"({"error":"mock refused"})", "application/json");
      return;
    }
    const json out = {{"id", "mock"},
                      {"object", "chat.completion"},
                      {"choices", json::array({{{"index", 0},
                                                {"message", {{"role", "assistant"}, {"content", reply->content}}},
                                                {"finish_reason", "stop"}}})}};
    res.set_content(out.dump(), "application/json");
  });
}

MockLlm::~MockLlm() { stop(); }

void MockLlm::start(int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    port_ = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ < 0) throw std::runtime_error("mock llm: cannot bind");
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockLlm::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockLlm::url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

void MockLlm::set_handler(std::function<std::optional<MockReply>(const MockRequest&)> handler) {
  std::lock_guard lock(mu_);
  handler_ = std::move(handler);
}

}  // namespace histkit::mock
