#include <benchmark/benchmark.h>

#include <random>

#include "histkit/eval/levenshtein.hpp"

namespace {

std::string random_sentence(std::mt19937_64& rng, std::size_t len) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz   .,";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[pick(rng)]);
  return s;
}

void BM_LevSimilarity(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto a = random_sentence(rng, static_cast<std::size_t>(state.range(0)));
  const auto b = random_sentence(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(histkit::eval::lev_similarity(a, b));
}
BENCHMARK(BM_LevSimilarity)->Arg(40)->Arg(120)->Arg(400);

// The filter only needs to know whether similarity clears the threshold.
void BM_LevExceeds(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::u32string x, y;
  for (int i = 0; i < state.range(0); ++i) {
    x.push_back(static_cast<char32_t>('a' + rng() % 26));
    y.push_back(static_cast<char32_t>('a' + rng() % 26));
  }
  for (auto _ : state) benchmark::DoNotOptimize(histkit::eval::lev_similarity_exceeds(x, y, 0.85));
}
BENCHMARK(BM_LevExceeds)->Arg(40)->Arg(120)->Arg(400);

}  // namespace
