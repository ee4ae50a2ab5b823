#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "histkit/embed/provider.hpp"
#include "histkit/server/index.hpp"

namespace histkit::server {

struct QueryFilters {
  std::optional<std::string> newspaper;
  std::optional<int> year_min;
  std::optional<int> year_max;
  std::optional<std::string> article_id;

  bool accepts(const Payload& p) const;
};

inline constexpr std::size_t kMaxK = 100;

struct QueryRequest {
  std::string text;
  std::string source_lang = "lb";
  std::string target_side;  // empty: same as source_lang
  std::size_t k = 10;
  QueryFilters filters;
};

struct QueryHit {
  std::string id;
  double score = 0.0;
  std::string text;
  std::string newspaper;
  std::optional<int> year;
  std::string article_id;
};

// Transport-neutral response; the HTTP layer copies it verbatim.
struct Response {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

// Parses a /query body. Throws Error(kInvalidArgument) with a message fit
// for a 400 response.
QueryRequest parse_query_request(std::string_view body);

// Request handling behind the HTTP endpoints. Thread-safe: queries read an
// immutable index snapshot, and set_index swaps the snapshot atomically so
// in-flight queries finish on the old one.
class Service {
 public:
  // Upper bucket bounds of the latency histogram, in milliseconds; a final
  // open bucket catches the rest.
  static constexpr std::array<double, 10> kLatencyBucketsMs{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  static constexpr int kRetryAfterSeconds = 5;

  explicit Service(std::shared_ptr<embed::Provider> provider);

  void set_index(std::shared_ptr<const SearchIndex> index);
  void set_loading(bool loading);
  std::shared_ptr<const SearchIndex> index() const;

  Response health() const;
  Response corpora() const;
  Response stats() const;
  Response query(std::string_view body);

  // The ranking itself, without JSON; throws Error on bad input or provider
  // failure.
  std::vector<QueryHit> search(const QueryRequest& req) const;

 private:
  void record(std::chrono::steady_clock::duration elapsed, bool ok);

  std::shared_ptr<embed::Provider> provider_;
  mutable std::mutex mu_;
  std::shared_ptr<const SearchIndex> index_;
  bool loading_ = false;
  std::uint64_t queries_ = 0;
  std::uint64_t errors_ = 0;
  std::array<std::uint64_t, kLatencyBucketsMs.size() + 1> latency_counts_{};
  std::chrono::steady_clock::time_point started_;
};

}  // namespace histkit::server
