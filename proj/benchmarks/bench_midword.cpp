// Microbenchmarks for the inner loops: SPD log / distance, Grassmann
// distance, Karcher means, per-video words and encoders.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "generators.hpp"
#include "midword/codebook.hpp"
#include "midword/encoding.hpp"
#include "midword/pipeline.hpp"
#include "midword/synthetic.hpp"

using namespace midword;
using namespace midword::testing;

namespace {

std::vector<MidLevelWord> cov_words(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MidLevelWord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.emplace_back(WordKind::kCovariance, random_spd(rng, d));
  return out;
}

void BM_SpdLog(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const SymPosDef x = random_spd(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spd_matrix_log(x));
}
BENCHMARK(BM_SpdLog)->Arg(8)->Arg(24)->Arg(48);

void BM_SpdDistance(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const SymPosDef x = random_spd(rng, state.range(0));
  const SymPosDef y = random_spd(rng, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(spd_geodesic_dist(x, y));
}
BENCHMARK(BM_SpdDistance)->Arg(8)->Arg(24)->Arg(48);

void BM_GrassmannDistance(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto d = state.range(0);
  const GrassmannPoint a = random_grassmann(rng, d, 10);
  const GrassmannPoint b = random_grassmann(rng, d, 10);
  for (auto _ : state) benchmark::DoNotOptimize(grassmann_geodesic_dist(a, b));
}
BENCHMARK(BM_GrassmannDistance)->Arg(24)->Arg(48);

void BM_KarcherMeanSpd(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::vector<SymPosDef> pts;
  for (int i = 0; i < state.range(0); ++i) pts.push_back(random_spd(rng, 16, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(karcher_mean(std::span<const SymPosDef>(pts)));
}
BENCHMARK(BM_KarcherMeanSpd)->Arg(16)->Arg(128);

void BM_KKarcherMeans(benchmark::State& state) {
  const auto words = cov_words(256, 8, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(k_karcher_means(words, static_cast<int>(state.range(0)), 9));
  }
}
BENCHMARK(BM_KKarcherMeans)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_EncodeBovw(benchmark::State& state) {
  const auto words = cov_words(64, 8, 6);
  const auto train = cov_words(256, 8, 7);
  const KarcherCodebook cb = k_karcher_means(train, 16, 1).codebook;
  for (auto _ : state) benchmark::DoNotOptimize(encode_bovw(cb, words));
}
BENCHMARK(BM_EncodeBovw)->Unit(benchmark::kMicrosecond);

void BM_EncodeFisher(benchmark::State& state) {
  const auto words = cov_words(64, 8, 8);
  const auto train = cov_words(512, 8, 9);
  const RiemannianGmm gmm = fit_riemannian_gmm(train, 16, 16, 2).model;
  for (auto _ : state) benchmark::DoNotOptimize(encode_fisher(gmm, words));
}
BENCHMARK(BM_EncodeFisher)->Unit(benchmark::kMicrosecond);

void BM_BuildWords(benchmark::State& state) {
  SyntheticSpec spec;
  spec.class_count = 2;
  spec.videos_per_class = 4;
  const auto videos = descriptors_of(generate_synthetic(spec));
  PipelineConfig c = PipelineConfig::desk();
  c.descriptor_dim = spec.dim;
  c.word_kind = static_cast<WordKind>(state.range(0));
  const AlignmentModel m = fit_alignment(c, TrainingSet<DescriptorSet>(videos));
  for (auto _ : state) benchmark::DoNotOptimize(build_words(c, m, videos[0]));
}
BENCHMARK(BM_BuildWords)
    ->Arg(static_cast<int>(WordKind::kSubspace))
    ->Arg(static_cast<int>(WordKind::kCovariance))
    ->Arg(static_cast<int>(WordKind::kGaussianSpd))
    ->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
