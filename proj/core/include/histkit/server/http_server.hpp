#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "histkit/server/service.hpp"

namespace histkit::server {

struct ServerConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string index_dir;
  std::string provider = "stub";  // stub | remote | file
  std::string provider_file;      // JSONL for the file provider
  std::size_t stub_dim = 64;
  std::string stub_model = "stub";
  std::string cors_origin = "*";

  // Optional JSON file with the same keys plus "addr" ("host:port"), then
  // HISTKIT_ADDR from the environment on top.
  static ServerConfig load(const std::optional<std::filesystem::path>& file);
};

// "host:port"; throws Error(kInvalidArgument).
std::pair<std::string, int> parse_addr(const std::string& addr);

// HTTP/1.1 JSON front end for a Service:
//   GET /health, GET /corpora, GET /stats, POST /query
// plus CORS headers and preflight handling for the UI origin.
class HttpServer {
 public:
  HttpServer(Service& service, std::string cors_origin = "*");
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and serves until stop(); returns false if binding failed.
  bool listen(const std::string& host, int port);
  // Binds to a free port and returns it (or -1); serve with listen_after_bind.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace histkit::server
