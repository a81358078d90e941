// Microbenchmarks for the hot paths: prediction averaging (both windows),
// voxel-wise inference, NMS, and downsampling. Volumes are seeded random
// fields so runs are comparable across machines and revisions.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "voxdet/classifier.hpp"
#include "voxdet/features.hpp"
#include "voxdet/postproc.hpp"
#include "voxdet/rng.hpp"
#include "voxdet/volume.hpp"

namespace {

using namespace voxdet;

Volume3 random_volume(Dims3 dims, std::uint64_t seed) {
  Volume3 v(dims);
  Rng rng(seed);
  for (std::int64_t i = 0; i < v.size(); ++i)
    v[i] = static_cast<float>(rng.uniform());
  return v;
}

void BM_AverageBall(benchmark::State& state) {
  const Volume3 v = random_volume({64, 64, 64}, 1);
  const double r_a = static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(average_predictions(v, r_a, AveragingWindow::kBall));
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_AverageBall)->Arg(3)->Arg(7);

void BM_AverageCube(benchmark::State& state) {
  const Volume3 v = random_volume({64, 64, 64}, 1);
  const double r_a = static_cast<double>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(average_predictions(v, r_a, AveragingWindow::kCube));
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_AverageCube)->Arg(3)->Arg(7);

void BM_PredictVoxelwise(benchmark::State& state) {
  const Volume3 v = random_volume({48, 48, 48}, 2);
  PatchSpec spec;  // default: scales {1,2,4}, radius 2
  const MlpModel model = make_initial_model(spec, {64}, 3);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(predict_voxelwise(v, model, threads));
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_PredictVoxelwise)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_NmsDetect(benchmark::State& state) {
  const Volume3 v = random_volume({64, 64, 64}, 4);
  PostprocConfig config;
  config.r_a = static_cast<double>(state.range(0));
  config.r_n = static_cast<double>(state.range(0));
  config.confidence_floor = 0.25;
  for (auto _ : state) benchmark::DoNotOptimize(nms_detect(v, config));
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_NmsDetect)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_DownsampleAvg(benchmark::State& state) {
  const Volume3 v = random_volume({96, 96, 96}, 5);
  const int factor = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(downsample_avg(v, factor));
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_DownsampleAvg)->Arg(2)->Arg(4);

void BM_FeatureExtraction(benchmark::State& state) {
  const Volume3 v = random_volume({48, 48, 48}, 6);
  const PatchSpec spec;
  const FeaturePyramid pyramid(v, spec);
  std::vector<float> out(static_cast<std::size_t>(spec.feature_dim()));
  int x = spec.receptive_radius();
  for (auto _ : state) {
    pyramid.features_at({x, 24, 24}, out);
    benchmark::DoNotOptimize(out.data());
    if (++x >= 48 - spec.receptive_radius()) x = spec.receptive_radius();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FeatureExtraction);

}  // namespace

BENCHMARK_MAIN();
