#include "histkit/adapt/batching.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "histkit/error.hpp"

namespace histkit::adapt {

std::size_t TrainConfig::effective_epochs() const {
  if (epochs) return *epochs;
  return objective == Objective::kContrastive ? 1 : 5;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  if (objective == Objective::kContrastive && batch_size < 2) {
    throw Error(ErrorCode::kInvalidArgument, "contrastive training needs batch_size >= 2 for in-batch negatives");
  }
  if (effective_epochs() == 0) throw Error(ErrorCode::kInvalidArgument, "epochs must be positive");
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be finite and >= 0");
  }
  if (!std::isfinite(scale) || scale <= 0.0) throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  if (hist_repeat == 0 || modern_repeat == 0) throw Error(ErrorCode::kInvalidArgument, "repeat counts must be positive");
}

std::size_t MixedBatchPlan::count(Source s) const {
  std::size_t c = 0;
  for (const auto& batch : batches) {
    c += static_cast<std::size_t>(std::count_if(batch.begin(), batch.end(), [&](const BatchItem& it) { return it.source == s; }));
  }
  return c;
}

MixedBatchPlan plan_batches(std::span<const std::string> hist_ids, std::span<const std::string> modern_ids,
                            const TrainConfig& cfg, std::uint64_t epoch) {
  cfg.validate();
  const bool use_hist = cfg.strategy != Strategy::kModern;
  const bool use_modern = cfg.strategy != Strategy::kHist;
  if (use_hist && hist_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "strategy " + std::string(to_string(cfg.strategy)) + " needs hist pairs");
  }
  if (use_modern && modern_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "strategy " + std::string(to_string(cfg.strategy)) + " needs modern pairs");
  }

  std::vector<BatchItem> items;
  auto add = [&](std::span<const std::string> ids, Source src, std::size_t repeat) {
    for (std::size_t r = 0; r < repeat; ++r) {
      for (std::size_t i = 0; i < ids.size(); ++i) items.push_back({ids[i], src, i});
    }
  };
  if (use_hist) add(hist_ids, Source::kHist, cfg.hist_repeat);
  if (use_modern) add(modern_ids, Source::kModern, cfg.modern_repeat);

  if (cfg.strategy == Strategy::kMixed) {
    const std::size_t h = hist_ids.size() * cfg.hist_repeat;
    const std::size_t m = modern_ids.size() * cfg.modern_repeat;
    if ((h > m ? h - m : m - h) > cfg.batch_size) {
      throw Error(ErrorCode::kInvalidArgument, "mixed strategy: " + std::to_string(h) + " hist vs " +
                                                   std::to_string(m) + " modern pairs differ by more than batch_size " +
                                                   std::to_string(cfg.batch_size));
    }
  }
  if (cfg.objective == Objective::kContrastive && items.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "contrastive training needs at least 2 pairs");
  }

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  // Fisher-Yates by hand: std::shuffle's draw sequence is not specified, so
  // plans would differ across standard libraries.
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }

  MixedBatchPlan plan;
  for (std::size_t start = 0; start < items.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(items.size(), start + cfg.batch_size);
    plan.batches.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(start),
                              items.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (cfg.objective == Objective::kContrastive && plan.batches.size() > 1 && plan.batches.back().size() == 1) {
    plan.batches[plan.batches.size() - 2].push_back(plan.batches.back().front());
    plan.batches.pop_back();
  }
  return plan;
}

}  // namespace histkit::adapt
