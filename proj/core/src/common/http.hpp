#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace histkit::http {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

// Splits an absolute http(s) URL. Throws Error(kInvalidArgument).
Endpoint parse_endpoint(std::string_view url);

struct Response {
  int status = 0;
  std::string body;
};

// POSTs a JSON body. Connection-level failures throw Error(kTransport); any
// HTTP status is returned to the caller.
Response post_json(const Endpoint& endpoint, const std::string& body, const std::string& bearer,
                   std::chrono::seconds timeout);

}  // namespace histkit::http
