#include "histkit/server/service.hpp"

#include "histkit/error.hpp"
#include "json.hpp"

namespace histkit::server {
namespace {

using nlohmann::json;

Response json_response(int status, const json& body) {
  return {status, body.dump(), {{"Content-Type", "application/json"}}};
}

Response error_response(int status, std::string_view message) {
  return json_response(status, {{"error", message}, {"status", status}});
}

template <typename T>
std::optional<T> optional_field(const json& obj, const char* key, const char* type_name) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kInvalidArgument, std::string("\"") + key + "\" must be " + type_name);
  }
}

json filters_json(const QueryFilters& f) {
  json j = json::object();
  if (f.newspaper) j["newspaper"] = *f.newspaper;
  if (f.year_min) j["year_min"] = *f.year_min;
  if (f.year_max) j["year_max"] = *f.year_max;
  if (f.article_id) j["article_id"] = *f.article_id;
  return j;
}

json year_json(const std::optional<int>& y) { return y ? json(*y) : json(nullptr); }

}  // namespace

bool QueryFilters::accepts(const Payload& p) const {
  if (newspaper && p.newspaper != *newspaper) return false;
  if (article_id && p.article_id != *article_id) return false;
  if (year_min && (!p.year || *p.year < *year_min)) return false;
  if (year_max && (!p.year || *p.year > *year_max)) return false;
  return true;
}

QueryRequest parse_query_request(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");

  QueryRequest req;
  const auto text = optional_field<std::string>(j, "text", "a string");
  if (!text || text->find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "\"text\" must be a nonempty string");
  }
  req.text = *text;
  if (auto s = optional_field<std::string>(j, "source_lang", "a string")) req.source_lang = *s;
  if (auto s = optional_field<std::string>(j, "target_side", "a string")) req.target_side = *s;
  if (req.target_side.empty()) req.target_side = req.source_lang;
  if (j.contains("k")) {
    const auto& k = j.at("k");
    if (!k.is_number_integer()) throw Error(ErrorCode::kInvalidArgument, "\"k\" must be an integer");
    const auto v = k.get<long long>();
    if (v < 1 || v > static_cast<long long>(kMaxK)) {
      throw Error(ErrorCode::kInvalidArgument, "\"k\" must be between 1 and " + std::to_string(kMaxK));
    }
    req.k = static_cast<std::size_t>(v);
  }
  if (j.contains("filters") && !j.at("filters").is_null()) {
    const auto& f = j.at("filters");
    if (!f.is_object()) throw Error(ErrorCode::kInvalidArgument, "\"filters\" must be an object");
    req.filters.newspaper = optional_field<std::string>(f, "newspaper", "a string");
    req.filters.year_min = optional_field<int>(f, "year_min", "an integer");
    req.filters.year_max = optional_field<int>(f, "year_max", "an integer");
    req.filters.article_id = optional_field<std::string>(f, "article_id", "a string");
    if (req.filters.year_min && req.filters.year_max && *req.filters.year_min > *req.filters.year_max) {
      throw Error(ErrorCode::kInvalidArgument, "\"year_min\" is greater than \"year_max\"");
    }
  }
  return req;
}

Service::Service(std::shared_ptr<embed::Provider> provider)
    : provider_(std::move(provider)), started_(std::chrono::steady_clock::now()) {
  if (!provider_) throw Error(ErrorCode::kInvalidArgument, "service needs an embedding provider");
}

void Service::set_index(std::shared_ptr<const SearchIndex> index) {
  std::lock_guard lock(mu_);
  index_ = std::move(index);
  loading_ = false;
}

void Service::set_loading(bool loading) {
  std::lock_guard lock(mu_);
  loading_ = loading;
}

std::shared_ptr<const SearchIndex> Service::index() const {
  std::lock_guard lock(mu_);
  return index_;
}

Response Service::health() const {
  std::lock_guard lock(mu_);
  const double uptime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  return json_response(200, {{"status", "ok"}, {"loading", loading_}, {"index_loaded", index_ != nullptr},
                             {"uptime_s", uptime}});
}

Response Service::corpora() const {
  const auto idx = index();
  json list = json::array();
  if (idx) {
    json sides = json::array();
    json pairs = json::array();
    for (const auto& s : idx->sides()) {
      sides.push_back({{"lang", s.lang}, {"count", s.payloads.size()}, {"adapted", s.adapted}});
      for (const auto& t : idx->sides()) {
        if (t.lang != s.lang) pairs.push_back({s.lang, t.lang});
      }
    }
    json adapter = nullptr;
    if (idx->adapter()) {
      adapter = {{"objective", adapt::to_string(idx->adapter()->objective)},
                 {"strategy", adapt::to_string(idx->adapter()->strategy)},
                 {"langs", idx->adapter_langs()}};
    }
    list.push_back({{"name", idx->name()},
                    {"model", idx->model()},
                    {"dim", idx->dim()},
                    {"sides", sides},
                    {"language_pairs", pairs},
                    {"adapter", adapter}});
  }
  return json_response(200, {{"corpora", list}});
}

Response Service::stats() const {
  std::lock_guard lock(mu_);
  json buckets = json::array();
  for (std::size_t i = 0; i < latency_counts_.size(); ++i) {
    buckets.push_back({{"le_ms", i < kLatencyBucketsMs.size() ? json(kLatencyBucketsMs[i]) : json(nullptr)},
                       {"count", latency_counts_[i]}});
  }
  const double uptime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  return json_response(200, {{"queries", queries_}, {"errors", errors_}, {"latency_ms", buckets}, {"uptime_s", uptime}});
}

std::vector<QueryHit> Service::search(const QueryRequest& req) const {
  if (req.k < 1 || req.k > kMaxK) {
    throw Error(ErrorCode::kInvalidArgument, "k must be between 1 and " + std::to_string(kMaxK));
  }
  const auto idx = index();
  if (!idx) throw Error(ErrorCode::kUnavailable, "no index loaded");
  const std::string& target = req.target_side.empty() ? req.source_lang : req.target_side;
  const IndexSide* side = idx->side(target);
  if (!side) throw Error(ErrorCode::kInvalidArgument, "unknown target_side \"" + target + "\"");

  std::vector<float> q;
  try {
    const std::vector<std::string> texts{req.text};
    auto vecs = provider_->embed_batch(texts);
    if (vecs.size() != 1) throw Error(ErrorCode::kCorrupt, "provider returned no vector");
    q = std::move(vecs.front());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kTransport, std::string("embedding provider failed: ") + e.what());
  }
  if (q.size() != idx->dim()) {
    throw Error(ErrorCode::kCorrupt, "provider dimension " + std::to_string(q.size()) +
                                         " does not match index dimension " + std::to_string(idx->dim()));
  }
  if (idx->adapts(req.source_lang)) q = adapt::apply_adapter(*idx->adapter(), std::span<const float>(q));

  const auto hits = embed::knn(q, side->embeddings, req.k,
                               [&](std::size_t row) { return req.filters.accepts(side->payloads[row]); });
  std::vector<QueryHit> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    const Payload& p = side->payloads[h.row];
    out.push_back({h.id, h.score, p.text, p.newspaper, p.year, p.article_id});
  }
  return out;
}

Response Service::query(std::string_view body) {
  const auto t0 = std::chrono::steady_clock::now();
  auto fail = [&](int status, std::string_view msg) {
    record(std::chrono::steady_clock::now() - t0, false);
    return error_response(status, msg);
  };
  bool loading = false;
  {
    std::lock_guard lock(mu_);
    loading = loading_;
  }
  if (loading) {
    Response r = fail(503, "index is loading");
    r.headers["Retry-After"] = std::to_string(kRetryAfterSeconds);
    return r;
  }

  QueryRequest req;
  try {
    req = parse_query_request(body);
  } catch (const Error& e) {
    return fail(400, e.what());
  }

  std::vector<QueryHit> hits;
  try {
    hits = search(req);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::kInvalidArgument:
        return fail(400, e.what());
      case ErrorCode::kUnavailable:
        return fail(503, e.what());
      case ErrorCode::kTransport: {
        Response r = fail(502, e.what());
        r.headers["Retry-After"] = std::to_string(kRetryAfterSeconds);
        return r;
      }
      default:
        return fail(500, e.what());
    }
  }

  const auto idx = index();
  json jh = json::array();
  for (const auto& h : hits) {
    jh.push_back({{"id", h.id},
                  {"score", h.score},
                  {"text", h.text},
                  {"newspaper", h.newspaper},
                  {"year", year_json(h.year)},
                  {"article_id", h.article_id}});
  }
  const json config = {{"source_lang", req.source_lang},
                       {"target_side", req.target_side},
                       {"k", req.k},
                       {"filters", filters_json(req.filters)},
                       {"adapter_applied", idx && idx->adapts(req.source_lang)},
                       {"model", idx ? idx->model() : ""},
                       {"index", idx ? idx->name() : ""}};
  record(std::chrono::steady_clock::now() - t0, true);
  return json_response(200, {{"hits", jh}, {"config", config}});
}

void Service::record(std::chrono::steady_clock::duration elapsed, bool ok) {
  const double ms = std::chrono::duration<double, std::milli>(elapsed).count();
  std::size_t bucket = 0;
  while (bucket < kLatencyBucketsMs.size() && ms > kLatencyBucketsMs[bucket]) ++bucket;
  std::lock_guard lock(mu_);
  if (ok) {
    ++queries_;
  } else {
    ++errors_;
  }
  ++latency_counts_[bucket];
}

}  // namespace histkit::server
