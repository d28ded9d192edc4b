#include "retune/diff.hpp"
#include "retune/fb_step.hpp"
#include "retune/group_norms.hpp"
#include "retune/hypergrad.hpp"
#include "retune/instances.hpp"
#include "retune/random.hpp"
#include "retune/wavelet.hpp"

#include <benchmark/benchmark.h>

namespace retune {
namespace {

Vec noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

// Side of a square RGB image.
void BM_Dwt2(benchmark::State& state) {
  const WaveletLayout layout(Shape{static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 3}, 2);
  const Vec x = noise(layout.size(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(dwt2(x, layout));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(layout.size()));
}
BENCHMARK(BM_Dwt2)->Arg(32)->Arg(64)->Arg(128);

void BM_Idwt2(benchmark::State& state) {
  const WaveletLayout layout(Shape{static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 3}, 2);
  const Vec w = noise(layout.size(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(idwt2(w, layout));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(layout.size()));
}
BENCHMARK(BM_Idwt2)->Arg(32)->Arg(128);

void BM_ProxGroupL21(benchmark::State& state) {
  const WaveletLayout layout(Shape{static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 3}, 2);
  const auto groups = group_structure(layout, PriorKind::BandsChannels);
  const Vec u = noise(layout.size(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(prox_group_l21(u, 0.5, *groups));
}
BENCHMARK(BM_ProxGroupL21)->Arg(32)->Arg(128);

StepPtr fb_for(int side, Vec& s) {
  const Shape shape{side, side, 3};
  const WaveletLayout layout(shape, 2);
  s = pack_weights(HyperParams::uniform(2, 3, PriorKind::BandsChannels, 0.3, 1.0));
  return WaveletFBStep::with_default_tau(layout, PriorKind::BandsChannels, noise(shape.size(), 4), s);
}

void BM_FbStep(benchmark::State& state) {
  Vec s;
  const StepPtr step = fb_for(static_cast<int>(state.range(0)), s);
  const Vec u = step->initial_state(s);
  for (auto _ : state) benchmark::DoNotOptimize(step->apply(u, s));
}
BENCHMARK(BM_FbStep)->Arg(32)->Arg(128);

// Backpropagation through one block of K steps.
void BM_BlockVjp(benchmark::State& state) {
  Vec s;
  const StepPtr step = fb_for(32, s);
  const SchemeSpec spec{step, static_cast<int>(state.range(0)), 1};
  const auto traj = unroll_K(spec, step->initial_state(s), s);
  const Vec v = noise(static_cast<std::size_t>(step->state_size()), 5);
  for (auto _ : state) benchmark::DoNotOptimize(block_vjp(*step, traj, s, v));
}
BENCHMARK(BM_BlockVjp)->Arg(1)->Arg(10);

void BM_RetuneHypergrad(benchmark::State& state) {
  const Instance inst = wavelet_instance(0, 10, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(g_retune(inst.spec, inst.s, inst.xbar, inst.x0));
}
BENCHMARK(BM_RetuneHypergrad)->Arg(1)->Arg(10);

}  // namespace
}  // namespace retune

BENCHMARK_MAIN();
