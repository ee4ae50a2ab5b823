#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "histkit/eval/bitext.hpp"

namespace histkit::eval {

// Run settings echoed next to the numbers so a report can be reproduced.
struct ReportConfig {
  std::string task;  // "bitext", "triplet" or "zeroshot"
  std::string source_embeddings;
  std::string target_embeddings;
  std::string adapter;
  std::optional<double> threshold;
  std::optional<bool> casefold;
  std::optional<std::string> label_template;
};

std::string bitext_report_json(const EvalReport& report, const ReportConfig& config);
std::string scalar_report_json(std::string_view metric, double value, std::size_t n, const ReportConfig& config);

void write_report(const std::filesystem::path& path, const std::string& json_text);

}  // namespace histkit::eval
