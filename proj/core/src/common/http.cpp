#include "common/http.hpp"

#include "histkit/error.hpp"
#include "httplib.h"

namespace histkit::http {

Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL lacks a scheme: " + std::string(url));
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kInvalidArgument, "unsupported URL scheme: " + std::string(scheme));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string_view::npos) {
    ep.origin = std::string(url);
    ep.path = "/";
  } else {
    ep.origin = std::string(url.substr(0, path_start));
    ep.path = std::string(url.substr(path_start));
  }
  if (ep.origin.size() <= scheme_end + 3) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL lacks a host: " + std::string(url));
  }
  return ep;
}

Response post_json(const Endpoint& endpoint, const std::string& body, const std::string& bearer,
                   std::chrono::seconds timeout) {
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  auto res = client.Post(endpoint.path, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kTransport, "POST " + endpoint.origin + endpoint.path + " failed: " +
                                           httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

}  // namespace histkit::http
