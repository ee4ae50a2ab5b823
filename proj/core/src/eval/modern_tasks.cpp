#include "histkit/eval/modern_tasks.hpp"

#include <fstream>
#include <unordered_map>

#include "histkit/embed/matrix.hpp"
#include "histkit/error.hpp"
#include "json.hpp"

namespace histkit::eval {
namespace {

constexpr std::string_view kPlaceholder = "{label}";

std::vector<std::vector<float>> embed_checked(const Embedder& embed, const std::vector<std::string>& texts) {
  auto out = embed(texts);
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::kInvalidArgument, "embedder returned " + std::to_string(out.size()) +
                                                 " vectors for " + std::to_string(texts.size()) + " texts");
  }
  return out;
}

template <typename Fn>
auto read_jsonl(const std::filesystem::path& path, Fn&& parse_one) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<decltype(parse_one(nlohmann::json{}))> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_one(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

double triplet_accuracy(std::span<const Triplet> triplets, const Embedder& embed) {
  if (triplets.empty()) return 0.0;
  std::vector<std::string> texts;
  texts.reserve(triplets.size() * 3);
  for (const auto& t : triplets) {
    texts.push_back(t.anchor);
    texts.push_back(t.positive);
    texts.push_back(t.negative);
  }
  const auto vecs = embed_checked(embed, texts);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& a = vecs[3 * i];
    if (embed::cosine(a, vecs[3 * i + 1]) > embed::cosine(a, vecs[3 * i + 2])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(triplets.size());
}

ZeroShotResult zero_shot_classify(std::span<const LabeledText> texts, std::span<const std::string> labels,
                                  std::string_view label_template, const Embedder& embed) {
  if (labels.empty()) throw Error(ErrorCode::kInvalidArgument, "zero-shot: no labels");
  const auto at = label_template.find(kPlaceholder);
  if (at == std::string_view::npos || label_template.find(kPlaceholder, at + 1) != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "zero-shot: template must contain exactly one {label} placeholder: \"" + std::string(label_template) + "\"");
  }
  std::unordered_map<std::string, std::size_t> label_index;
  std::vector<std::string> rendered;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_index.emplace(labels[i], i);
    std::string s(label_template);
    s.replace(at, kPlaceholder.size(), labels[i]);
    rendered.push_back(std::move(s));
  }
  const auto label_vecs = embed_checked(embed, rendered);

  std::vector<std::string> inputs;
  inputs.reserve(texts.size());
  for (const auto& t : texts) inputs.push_back(t.text);
  const auto text_vecs = inputs.empty() ? std::vector<std::vector<float>>{} : embed_checked(embed, inputs);

  ZeroShotResult result;
  result.predictions.reserve(texts.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::size_t best = 0;
    double best_score = embed::cosine(text_vecs[i], label_vecs[0]);
    for (std::size_t l = 1; l < label_vecs.size(); ++l) {
      const double s = embed::cosine(text_vecs[i], label_vecs[l]);
      if (s > best_score) {
        best_score = s;
        best = l;
      }
    }
    result.predictions.push_back(best);
    const auto gold = label_index.find(texts[i].label);
    if (gold == label_index.end()) {
      throw Error(ErrorCode::kInvalidArgument, "zero-shot: text " + std::to_string(i) + " has unknown label \"" +
                                                   texts[i].label + "\"");
    }
    if (gold->second == best) ++correct;
  }
  if (!texts.empty()) result.accuracy = static_cast<double>(correct) / static_cast<double>(texts.size());
  return result;
}

std::vector<Triplet> load_triplets(const std::filesystem::path& path) {
  return read_jsonl(path, [](const nlohmann::json& j) {
    return Triplet{j.at("anchor").get<std::string>(), j.at("positive").get<std::string>(),
                   j.at("negative").get<std::string>()};
  });
}

std::vector<LabeledText> load_labeled_texts(const std::filesystem::path& path) {
  return read_jsonl(path, [](const nlohmann::json& j) {
    return LabeledText{j.at("text").get<std::string>(), j.at("label").get<std::string>()};
  });
}

}  // namespace histkit::eval
