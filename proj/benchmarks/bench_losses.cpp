#include <benchmark/benchmark.h>

#include <random>

#include "histkit/adapt/losses.hpp"

namespace {

histkit::adapt::Rows random_rows(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  histkit::adapt::Rows r(n, dim);
  for (auto& x : r.v) x = g(rng);
  return r;
}

void BM_Mnrl(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto a = random_rows(8, dim, 1);
  const auto b = random_rows(8, dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(histkit::adapt::mnrl_loss(a, b, 20.0, true));
}
BENCHMARK(BM_Mnrl)->Arg(64)->Arg(768);

void BM_Distill(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto s = random_rows(8, dim, 1);
  const auto t = random_rows(8, dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(histkit::adapt::distill_loss(s, t));
}
BENCHMARK(BM_Distill)->Arg(64)->Arg(768);

}  // namespace
