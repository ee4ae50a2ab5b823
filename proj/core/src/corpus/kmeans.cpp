#include "histkit/corpus/kmeans.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "histkit/error.hpp"

namespace histkit::corpus {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

// Returns the SSE of the assignment.
double assign(std::span<const std::vector<double>> points,
              const std::vector<std::vector<double>>& centroids, std::vector<int>& labels,
              std::vector<double>& distances) {
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    int best = 0;
    double best_d = squared_distance(points[i], centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = squared_distance(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    distances[i] = best_d;
    sse += best_d;
  }
  return sse;
}

void update_centroids(std::span<const std::vector<double>> points, std::vector<int>& labels,
                      std::vector<std::vector<double>>& centroids) {
  const std::size_t k = centroids.size();
  const std::size_t dim = centroids[0].size();
  std::vector<std::size_t> counts(k, 0);
  std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
  // Fixed point order keeps the floating-point sums reproducible.
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }

  std::vector<double> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    dist[i] = squared_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
      if (far == points.size() || dist[i] > dist[far]) far = i;
    }
    if (far == points.size()) continue;  // every cluster is a singleton
    --counts[static_cast<std::size_t>(labels[far])];
    labels[far] = static_cast<int>(c);
    counts[c] = 1;
    centroids[c] = points[far];
    dist[far] = 0.0;
  }
}

}  // namespace

KMeansResult kmeans_cluster(std::span<const std::vector<double>> points, int k,
                            std::uint64_t seed, int max_iters) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "kmeans: empty input");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "kmeans: k must be >= 1");
  if (static_cast<std::size_t>(k) > points.size()) {
    throw Error(ErrorCode::kInvalidArgument, "kmeans: k = " + std::to_string(k) +
                                                 " exceeds the number of points (" +
                                                 std::to_string(points.size()) + ")");
  }
  if (max_iters < 0) throw Error(ErrorCode::kInvalidArgument, "kmeans: max_iters must be >= 0");
  const std::size_t dim = points[0].size();
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "kmeans: zero-dimensional points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) {
      throw Error(ErrorCode::kInvalidArgument,
                  "kmeans: point " + std::to_string(i) + " has dimension " +
                      std::to_string(points[i].size()) + ", expected " + std::to_string(dim));
    }
  }

  // Partial Fisher-Yates: the first k slots become the initial centroids.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }

  KMeansResult result;
  result.centroids.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) result.centroids.push_back(points[order[static_cast<std::size_t>(c)]]);
  result.labels.assign(points.size(), 0);
  result.distances.assign(points.size(), 0.0);
  result.sse_history.push_back(assign(points, result.centroids, result.labels, result.distances));

  std::vector<int> next_labels(points.size());
  std::vector<double> next_distances(points.size());
  for (int it = 0; it < max_iters; ++it) {
    std::vector<int> previous = result.labels;
    update_centroids(points, result.labels, result.centroids);
    result.sse_history.push_back(assign(points, result.centroids, next_labels, next_distances));
    result.iterations = it + 1;
    const bool stable = next_labels == previous;
    result.labels.swap(next_labels);
    result.distances.swap(next_distances);
    if (stable) {
      result.converged = true;
      break;
    }
  }
  return result;
}

ArticleClustering cluster_articles(std::span<const Article> articles, int k, std::uint64_t seed,
                                   int max_iters) {
  std::vector<std::vector<double>> points;
  std::vector<const Article*> clustered;
  for (const auto& a : articles) {
    if (!a.topic_vector) continue;
    points.push_back(*a.topic_vector);
    clustered.push_back(&a);
  }
  KMeansResult km = kmeans_cluster(points, k, seed, max_iters);
  ArticleClustering out;
  out.centroids = std::move(km.centroids);
  out.sse_history = std::move(km.sse_history);
  out.assignments.reserve(clustered.size());
  for (std::size_t i = 0; i < clustered.size(); ++i) {
    out.assignments.push_back({clustered[i]->id, km.labels[i], km.distances[i]});
  }
  return out;
}

}  // namespace histkit::corpus
