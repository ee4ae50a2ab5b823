#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "histkit/corpus/article.hpp"

namespace histkit::corpus {

struct ClusterAssignment {
  std::string article_id;
  int cluster_id = 0;
  double distance = 0.0;  // squared Euclidean distance to the centroid

  bool operator==(const ClusterAssignment&) const = default;
};

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> labels;         // per input point
  std::vector<double> distances;   // squared distance to its centroid
  // Within-cluster SSE after every assignment step, starting with the
  // assignment against the initial centroids.
  std::vector<double> sse_history;
  int iterations = 0;
  bool converged = false;
};

// Lloyd's algorithm. Initial centroids are k distinct input points drawn
// uniformly under `seed`; a centroid that loses all its points is moved onto
// the point farthest from its own centroid. Ties in assignment go to the lower
// centroid index.
KMeansResult kmeans_cluster(std::span<const std::vector<double>> points, int k,
                            std::uint64_t seed, int max_iters = 100);

struct ArticleClustering {
  std::vector<std::vector<double>> centroids;
  std::vector<ClusterAssignment> assignments;
  std::vector<double> sse_history;
};

// Clusters the articles that carry a topic vector; the others are skipped.
ArticleClustering cluster_articles(std::span<const Article> articles, int k,
                                   std::uint64_t seed, int max_iters = 100);

}  // namespace histkit::corpus
