#include <benchmark/benchmark.h>

#include <random>

#include "histkit/embed/matrix.hpp"
#include "histkit/eval/bitext.hpp"

namespace {

void BM_BitextAccuracy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 256;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g(0.0f, 1.0f);
  histkit::eval::BitextTask task;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("p" + std::to_string(i));
    task.queries.push_back({ids.back(), ""});
    task.candidates.push_back({ids.back(), ""});
    task.gold.push_back(i);
  }
  task.excluded.assign(n, {});
  task.excluded_reverse.assign(n, {});
  std::vector<float> a(n * dim), b(n * dim);
  for (auto& x : a) x = g(rng);
  for (std::size_t i = 0; i < a.size(); ++i) b[i] = a[i] + 0.5f * g(rng);
  const histkit::embed::EmbeddingMatrix src(dim, ids, a), tgt(dim, ids, b);
  const auto threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(histkit::eval::bitext_accuracy(task, src, tgt, threads));
}
BENCHMARK(BM_BitextAccuracy)->Args({1000, 1})->Args({1000, 4})->Unit(benchmark::kMillisecond);

}  // namespace
