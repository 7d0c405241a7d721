// Per-iteration costs of the optimizer steps and the oracles they call.

#include "saddle/optim.hpp"
#include "saddle/precond.hpp"
#include "saddle/problems.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

using namespace saddle;

// Construction certifies the spectrum, so each size is built once.
const SaddleProblem& bench_problem(const benchmark::State& state) {
  static std::map<std::int64_t, SaddleProblem> cache;
  const std::int64_t d = state.range(0);
  auto it = cache.find(d);
  if (it == cache.end()) it = cache.emplace(d, make_quadratic(d, d, 1.0, 4.0, 1, 0.1)).first;
  return it->second;
}

void BM_Gradient(benchmark::State& state) {
  const SaddleProblem& p = bench_problem(state);
  const PointPair z = initial_point(p, 1.0, 2);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(p.gradient(z, {++seed, 1}));
}
BENCHMARK(BM_Gradient)->Arg(5)->Arg(50)->Arg(200);

void BM_Hutchinson(benchmark::State& state) {
  const SaddleProblem& p = bench_problem(state);
  const PointPair z = initial_point(p, 1.0, 2);
  RngStream rng(3, "rademacher");
  for (auto _ : state) benchmark::DoNotOptimize(curvature_hutchinson(p, z, {0, 1}, rng));
}
BENCHMARK(BM_Hutchinson)->Arg(5)->Arg(50)->Arg(200);

void BM_ExtragradStep(benchmark::State& state) {
  const SaddleProblem& p = bench_problem(state);
  StepContext ctx(4, 1);
  ScalingState scaling = ScalingState::oasis().initialized(p.dim_x(), p.dim_y());
  PointPair z = initial_point(p, 1.0, 2);
  for (auto _ : state) {
    StepResult r = step_extragrad(ctx, p, z, scaling, 1e-3);
    z = std::move(r.next);
  }
  state.counters["grad_calls/iter"] =
      benchmark::Counter(static_cast<double>(ctx.grad_calls), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_ExtragradStep)->Arg(5)->Arg(50)->Arg(200);

void BM_SingleCallStep(benchmark::State& state) {
  const SaddleProblem& p = bench_problem(state);
  StepContext ctx(4, 1);
  ScalingState scaling = ScalingState::oasis().initialized(p.dim_x(), p.dim_y());
  PointPair z = initial_point(p, 1.0, 2);
  SingleCallCache cache = warm_start_single_call(ctx, p, z, scaling);
  for (auto _ : state) {
    StepResult r = step_single_call(ctx, p, z, cache, scaling, 1e-3, 0.0, 0.25);
    z = std::move(r.next);
  }
  state.counters["grad_calls/iter"] =
      benchmark::Counter(static_cast<double>(ctx.grad_calls), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_SingleCallStep)->Arg(5)->Arg(50)->Arg(200);

void BM_ScalingUpdate(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  ScalingState s = ScalingState::oasis().initialized(d, d);
  const CurvatureDiag h{Vector::Constant(d, 0.5), Vector::Constant(d, -0.5)};
  RngStream skip(5, "precond-skip");
  for (auto _ : state) benchmark::DoNotOptimize(apply_update(s, h, skip));
}
BENCHMARK(BM_ScalingUpdate)->Arg(5)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
