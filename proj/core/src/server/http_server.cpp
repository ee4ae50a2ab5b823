#include "histkit/server/http_server.hpp"

#include <cstdlib>

#include "common/fs_util.hpp"
#include "histkit/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace histkit::server {

std::pair<std::string, int> parse_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 == addr.size()) {
    throw Error(ErrorCode::kInvalidArgument, "address must be host:port, got \"" + addr + "\"");
  }
  std::string host = addr.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in \"" + addr + "\"");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range in \"" + addr + "\"");
  return {host.empty() ? "0.0.0.0" : host, port};
}

ServerConfig ServerConfig::load(const std::optional<std::filesystem::path>& file) {
  ServerConfig c;
  if (file) {
    try {
      const auto j = nlohmann::json::parse(fs_util::read_file(*file));
      if (j.contains("addr")) std::tie(c.host, c.port) = parse_addr(j.at("addr").get<std::string>());
      c.index_dir = j.value("index", c.index_dir);
      c.provider = j.value("provider", c.provider);
      c.provider_file = j.value("provider_file", c.provider_file);
      c.stub_dim = j.value("stub_dim", c.stub_dim);
      c.stub_model = j.value("stub_model", c.stub_model);
      c.cors_origin = j.value("cors_origin", c.cors_origin);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, file->string() + ": " + e.what());
    }
  }
  if (const char* addr = std::getenv("HISTKIT_ADDR"); addr && *addr) std::tie(c.host, c.port) = parse_addr(addr);
  return c;
}

struct HttpServer::Impl {
  Service& service;
  std::string cors_origin;
  httplib::Server server;

  Impl(Service& s, std::string origin) : service(s), cors_origin(std::move(origin)) {}

  void reply(httplib::Response& res, const Response& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers) {
      if (k != "Content-Type") res.set_header(k, v);
    }
    res.set_content(r.body, "application/json");
  }
};

HttpServer::HttpServer(Service& service, std::string cors_origin)
    : impl_(std::make_unique<Impl>(service, std::move(cors_origin))) {
  auto& srv = impl_->server;
  Impl* impl = impl_.get();
  srv.set_default_headers({{"Access-Control-Allow-Origin", impl->cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Get("/health", [impl](const httplib::Request&, httplib::Response& res) { impl->reply(res, impl->service.health()); });
  srv.Get("/corpora", [impl](const httplib::Request&, httplib::Response& res) { impl->reply(res, impl->service.corpora()); });
  srv.Get("/stats", [impl](const httplib::Request&, httplib::Response& res) { impl->reply(res, impl->service.stats()); });
  srv.Post("/query", [impl](const httplib::Request& req, httplib::Response& res) {
    impl->reply(res, impl->service.query(req.body));
  });
  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json({{"error", msg}, {"status", 500}}).dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int HttpServer::bind_to_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}
bool HttpServer::is_running() const { return impl_->server.is_running(); }
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace histkit::server
