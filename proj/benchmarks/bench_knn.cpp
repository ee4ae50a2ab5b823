#include <benchmark/benchmark.h>

#include <random>

#include "histkit/embed/matrix.hpp"

namespace {

using histkit::embed::EmbeddingMatrix;

EmbeddingMatrix random_matrix(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<std::string> ids;
  std::vector<float> data(n * dim);
  for (auto& x : data) x = g(rng);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return histkit::embed::normalize_rows(EmbeddingMatrix(dim, std::move(ids), std::move(data)));
}

void BM_Knn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_matrix(n, 768);
  const std::vector<float> q(m.row(0).begin(), m.row(0).end());
  for (auto _ : state) benchmark::DoNotOptimize(histkit::embed::knn(q, m, 10));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Knn)->Arg(1000)->Arg(10000)->Arg(50000);

}  // namespace
