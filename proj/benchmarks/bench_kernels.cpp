#include <benchmark/benchmark.h>

#include "fz/kernels.hpp"
#include "fz/synth.hpp"

using namespace fz;

namespace {

StreamConfig grid_config(int grid) {
  StreamConfig cfg;
  cfg.n_sup = 33;
  cfg.n_unsup = 10;
  cfg.grid_h = grid;
  cfg.grid_w = grid;
  return cfg;
}

}  // namespace

static void BM_GridSample(benchmark::State& state) {
  const int grid = int(state.range(0));
  StreamConfig cfg = grid_config(grid);
  auto kps = synth::front_face_layout(cfg);
  auto fm = synth::stub_encoder(kps, cfg);
  KeypointSet moved = kps;
  for (auto& c : moved.coords) c.x = c.x * 0.9 + 0.05;
  auto [flow, conf] = synth::affine_flow(moved, kps, grid, grid);

  for (auto _ : state) {
    auto warped = frontal::grid_sample(fm, flow);
    benchmark::DoNotOptimize(warped.data.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * fm.channels * grid *
                          grid);
}
BENCHMARK(BM_GridSample)->Arg(32)->Arg(64);

static void BM_Fuse(benchmark::State& state) {
  const int n = int(state.range(0));
  StreamConfig cfg = grid_config(32);
  auto kps = synth::front_face_layout(cfg);
  auto fm = synth::stub_encoder(kps, cfg);
  ScalarMap conf(32, 32, 0.5);

  std::vector<FeatureMap> maps(size_t(n), fm);
  std::vector<ScalarMap> confs(size_t(n), conf);
  for (auto _ : state) {
    auto [fused, weights] = frontal::fuse(maps, confs);
    benchmark::DoNotOptimize(fused.data.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_Fuse)->Arg(2)->Arg(3)->Arg(5);

static void BM_KeypointHeatmaps(benchmark::State& state) {
  StreamConfig cfg = grid_config(32);
  auto src = synth::front_face_layout(cfg);
  KeypointSet dst = src;
  for (auto& c : dst.coords) c.x = c.x * 0.8 + 0.1;

  for (auto _ : state) {
    auto maps = frontal::keypoint_heatmaps(src, dst, 32, 32);
    benchmark::DoNotOptimize(maps.data.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_KeypointHeatmaps);

static void BM_AffineFlow(benchmark::State& state) {
  StreamConfig cfg = grid_config(32);
  auto src = synth::front_face_layout(cfg);
  KeypointSet dst = src;
  for (auto& c : dst.coords) c.x = c.x * 0.85 + 0.07;

  for (auto _ : state) {
    auto [flow, conf] = synth::affine_flow(src, dst, 32, 32);
    benchmark::DoNotOptimize(flow.data.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_AffineFlow);

BENCHMARK_MAIN();
