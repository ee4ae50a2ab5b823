#include "histkit/corpus/selection.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <unordered_map>

#include "histkit/error.hpp"

namespace histkit::corpus {

void SelectionConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "selection: k must be >= 1");
  if (min_sentences < 1 || min_sentences > max_sentences) {
    throw Error(ErrorCode::kInvalidArgument,
                "selection: need 1 <= min_sentences <= max_sentences");
  }
  if (min_cluster_size < 0 || extra_samples_per_cluster < 0 || max_iters < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "selection: min_cluster_size, extra_samples_per_cluster and max_iters must be >= 0");
  }
}

std::size_t count_kept_clusters(std::span<const ClusterAssignment> assignments,
                                int min_cluster_size) {
  std::map<int, std::size_t> sizes;
  for (const auto& a : assignments) ++sizes[a.cluster_id];
  return static_cast<std::size_t>(std::count_if(sizes.begin(), sizes.end(), [&](const auto& kv) {
    return kv.second > static_cast<std::size_t>(min_cluster_size);
  }));
}

std::vector<Article> select_articles(std::span<const Article> articles,
                                     std::span<const ClusterAssignment> assignments,
                                     const SelectionConfig& cfg) {
  cfg.validate();
  std::unordered_map<std::string_view, const Article*> by_id;
  for (const auto& a : articles) by_id.emplace(a.id, &a);

  std::map<int, std::vector<const ClusterAssignment*>> clusters;
  for (const auto& a : assignments) {
    if (!by_id.contains(a.article_id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "selection: assignment for unknown article \"" + a.article_id + "\"");
    }
    clusters[a.cluster_id].push_back(&a);
  }

  std::vector<Article> selected;
  for (auto& [cluster_id, members] : clusters) {
    if (members.size() <= static_cast<std::size_t>(cfg.min_cluster_size)) continue;

    std::vector<const ClusterAssignment*> eligible;
    for (const auto* m : members) {
      const auto n = by_id.at(m->article_id)->sentences.size();
      if (n >= static_cast<std::size_t>(cfg.min_sentences)) eligible.push_back(m);
    }
    if (eligible.empty()) continue;
    std::sort(eligible.begin(), eligible.end(), [](const auto* a, const auto* b) {
      if (a->distance != b->distance) return a->distance < b->distance;
      return a->article_id < b->article_id;
    });

    std::vector<const ClusterAssignment*> picks{eligible.front()};
    std::vector<const ClusterAssignment*> rest(eligible.begin() + 1, eligible.end());
    std::sort(rest.begin(), rest.end(),
              [](const auto* a, const auto* b) { return a->article_id < b->article_id; });
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32U),
                      static_cast<std::uint32_t>(cluster_id)};
    std::mt19937_64 rng(seq);
    std::shuffle(rest.begin(), rest.end(), rng);
    const auto extra = std::min(rest.size(), static_cast<std::size_t>(cfg.extra_samples_per_cluster));
    picks.insert(picks.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(extra));

    for (const auto* p : picks) {
      Article a = *by_id.at(p->article_id);
      if (a.sentences.size() > static_cast<std::size_t>(cfg.max_sentences)) {
        a.sentences.resize(static_cast<std::size_t>(cfg.max_sentences));
      }
      selected.push_back(std::move(a));
    }
  }
  return selected;
}

}  // namespace histkit::corpus
