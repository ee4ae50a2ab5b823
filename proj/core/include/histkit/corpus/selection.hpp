#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "histkit/corpus/article.hpp"
#include "histkit/corpus/kmeans.hpp"

namespace histkit::corpus {

struct SelectionConfig {
  int k = 2000;
  int min_cluster_size = 20;  // clusters must be strictly larger
  int min_sentences = 5;
  int max_sentences = 20;
  int extra_samples_per_cluster = 3;
  std::uint64_t seed = 0;
  int max_iters = 100;

  void validate() const;
};

// Per kept cluster, in ascending cluster id: the representative (minimal
// distance to the centroid, ties by smallest id) followed by up to
// `extra_samples_per_cluster` uniformly drawn members. Only articles with at
// least `min_sentences` sentences are eligible; longer ones are cut to the
// first `max_sentences`.
std::vector<Article> select_articles(std::span<const Article> articles,
                                     std::span<const ClusterAssignment> assignments,
                                     const SelectionConfig& cfg);

// Number of clusters holding more than `min_cluster_size` assignments.
std::size_t count_kept_clusters(std::span<const ClusterAssignment> assignments,
                                int min_cluster_size);

}  // namespace histkit::corpus
