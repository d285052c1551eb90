// Serial reference versus OpenMP path for the hot kernels.
// Argument 0 selects Exec::serial, 1 selects Exec::parallel.
#include <benchmark/benchmark.h>

#include "denseassoc/appearance.hpp"
#include "denseassoc/localize.hpp"
#include "denseassoc/motion.hpp"
#include "denseassoc/synth.hpp"

using namespace denseassoc;

namespace {

const Scenario& scene() {
  static const Scenario s = [] {
    ScenarioConfig c = standard_crowded_scenario();
    c.n_frames = 4;
    c.n_agents = 200;
    c.min_spacing = 10;
    return generate_scenario(c);
  }();
  return s;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

FramePoints truth_frame(std::size_t f) {
  FramePoints out;
  for (const auto& t : scene().truth) out.push_back(t.observations[f].point);
  return out;
}

void BM_extract_peaks(benchmark::State& state) {
  const DensityMap& d = scene().bundle.density[1];
  for (auto _ : state) benchmark::DoNotOptimize(extract_peaks(d, {}, exec_of(state)));
  label(state);
}

void BM_encode_mpm(benchmark::State& state) {
  const FramePoints prev = truth_frame(0), next = truth_frame(1);
  std::vector<std::optional<std::size_t>> corr(next.size());
  for (std::size_t i = 0; i < corr.size(); ++i) corr[i] = i;
  const ScenarioConfig c = standard_crowded_scenario();
  for (auto _ : state)
    benchmark::DoNotOptimize(encode_mpm(prev, next, corr, {}, c.height, c.width, exec_of(state)));
  label(state);
}

void BM_render_density(benchmark::State& state) {
  const FramePoints pts = truth_frame(0);
  const std::vector<Point> centers(pts.begin(), pts.end());
  for (auto _ : state) benchmark::DoNotOptimize(render_density(centers, 3.0, 512, 512, exec_of(state)));
  label(state);
}

void BM_distance_matrix(benchmark::State& state) {
  const FramePoints a = truth_frame(0), b = truth_frame(1);
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(a, b, exec_of(state)));
  label(state);
}

void BM_similarity_diffusion(benchmark::State& state) {
  const FeatureSet& a = (*scene().bundle.features)[0];
  const FeatureSet& b = (*scene().bundle.features)[1];
  for (auto _ : state) benchmark::DoNotOptimize(similarity_diffusion(a, b, {}, exec_of(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_extract_peaks)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_encode_mpm)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_render_density)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_distance_matrix)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_similarity_diffusion)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
