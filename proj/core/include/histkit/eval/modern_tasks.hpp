#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace histkit::eval {

// Maps a batch of texts to one vector per text, in order.
using Embedder = std::function<std::vector<std::vector<float>>(const std::vector<std::string>&)>;

struct Triplet {
  std::string anchor;
  std::string positive;
  std::string negative;
};

// Fraction of triplets with cos(anchor, positive) > cos(anchor, negative).
// Ties count as failures. 0 for an empty set.
double triplet_accuracy(std::span<const Triplet> triplets, const Embedder& embed);

struct LabeledText {
  std::string text;
  std::string label;
};

struct ZeroShotResult {
  std::vector<std::size_t> predictions;  // index into the label list
  double accuracy = 0.0;
};

inline constexpr std::string_view kDefaultTopicTemplate = "The topic of the news is {label}";

// Each label is rendered through `label_template` (exactly one "{label}") and
// embedded once; every text gets the label with the highest cosine
// similarity, ties going to the lower label index.
ZeroShotResult zero_shot_classify(std::span<const LabeledText> texts, std::span<const std::string> labels,
                                  std::string_view label_template, const Embedder& embed);

// JSONL loaders: {"anchor","positive","negative"} and {"text","label"}.
std::vector<Triplet> load_triplets(const std::filesystem::path& path);
std::vector<LabeledText> load_labeled_texts(const std::filesystem::path& path);

}  // namespace histkit::eval
