#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "histkit/adapt/model.hpp"

namespace histkit::adapt {

struct TrainConfig {
  Objective objective = Objective::kContrastive;
  Strategy strategy = Strategy::kHist;
  std::size_t batch_size = 8;
  std::optional<std::size_t> epochs;  // unset: 1 contrastive, 5 distill
  double learning_rate = 2e-5;
  double scale = 20.0;
  std::uint64_t seed = 0;
  // Contrastive only: also adapt the target side (gradients through b_j).
  bool symmetric = false;
  // Bidirectional distillation only: include MSE(adapter(tgt), teacher).
  bool second_term = true;
  // How often each pair is visited per epoch, per source. Lets a plan
  // upsample one domain by duplication.
  std::size_t hist_repeat = 1;
  std::size_t modern_repeat = 1;

  std::size_t effective_epochs() const;
  // Throws Error(kInvalidArgument).
  void validate() const;
};

enum class Source { kHist, kModern };

struct BatchItem {
  std::string pair_id;
  Source source = Source::kHist;
  std::size_t index = 0;  // row in the hist or modern dataset

  bool operator==(const BatchItem&) const = default;
};

struct MixedBatchPlan {
  std::vector<std::vector<BatchItem>> batches;

  std::size_t count(Source s) const;
  bool operator==(const MixedBatchPlan&) const = default;
};

// One epoch of batches. hist / modern shuffle only their own pairs, mixed
// shuffles the tagged union so a batch can hold both sources. The shuffle is
// seeded by (cfg.seed, epoch). Contrastive plans never end in a batch of one:
// a trailing single pair joins the previous batch. Under mixed, the per-epoch
// hist and modern counts may differ by at most batch_size.
MixedBatchPlan plan_batches(std::span<const std::string> hist_ids, std::span<const std::string> modern_ids,
                            const TrainConfig& cfg, std::uint64_t epoch = 0);

}  // namespace histkit::adapt
