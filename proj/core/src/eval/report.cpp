#include "histkit/eval/report.hpp"

#include "common/fs_util.hpp"
#include "json.hpp"

namespace histkit::eval {
namespace {

nlohmann::json config_json(const ReportConfig& c) {
  nlohmann::json j = {{"task", c.task}, {"tie_rule", "strict"}};
  if (!c.source_embeddings.empty()) j["source_embeddings"] = c.source_embeddings;
  if (!c.target_embeddings.empty()) j["target_embeddings"] = c.target_embeddings;
  if (!c.adapter.empty()) j["adapter"] = c.adapter;
  if (c.threshold) j["threshold"] = *c.threshold;
  if (c.casefold) j["casefold"] = *c.casefold;
  if (c.label_template) j["label_template"] = *c.label_template;
  return j;
}

}  // namespace

std::string bitext_report_json(const EvalReport& r, const ReportConfig& config) {
  const nlohmann::json j = {{"acc_src_to_tgt", r.acc_src_to_tgt}, {"acc_tgt_to_src", r.acc_tgt_to_src},
                            {"acc_avg", r.acc_avg()},            {"n_queries", r.n_queries},
                            {"n_excluded_pairs", r.n_excluded_pairs}, {"hits_src_to_tgt", r.hits_src_to_tgt},
                            {"hits_tgt_to_src", r.hits_tgt_to_src}, {"config", config_json(config)}};
  return j.dump(2);
}

std::string scalar_report_json(std::string_view metric, double value, std::size_t n, const ReportConfig& config) {
  nlohmann::json j;
  j[std::string(metric)] = value;
  j["n"] = n;
  j["config"] = config_json(config);
  return j.dump(2);
}

void write_report(const std::filesystem::path& path, const std::string& json_text) {
  fs_util::write_atomically(path, [&](std::ostream& out) { out << json_text << '\n'; });
}

}  // namespace histkit::eval
