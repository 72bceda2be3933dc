#include <benchmark/benchmark.h>

#include "wtgswitch/dt_engine.hpp"
#include "wtgswitch/reference_integrator.hpp"
#include "wtgswitch/strategies.hpp"

using namespace wtgswitch;

namespace {

const SystemParams kParams = case_study_params();
const ModePair kModes = case_study_modes(5);
constexpr double kUnsafeDpd = 1000.0 / 6000.0;

void BM_DtRecursion(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto c = dt_recursion(SystemState(5), kParams, kModes.support, kUnsafeDpd, order);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_DtRecursion)->Arg(30)->Arg(100)->Arg(200);

void BM_PredictTrajectory(benchmark::State& state) {
  for (auto _ : state) {
    auto t = predict_trajectory(SystemState(5), kParams, kModes.mppt, kUnsafeDpd, 20.0,
                                WindowConfig{}, 1e-2);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_PredictTrajectory)->Unit(benchmark::kMicrosecond);

void BM_PredictiveDecide(benchmark::State& state) {
  for (auto _ : state) {
    auto d = predictive_decide(SystemState(5), kUnsafeDpd, kParams, kModes.mppt, SafetyLimits{},
                               20.0, WindowConfig{});
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_PredictiveDecide)->Unit(benchmark::kMicrosecond);

void BM_Rk4Oracle(benchmark::State& state) {
  for (auto _ : state) {
    auto t = integrate_fixed(SystemState(5), kParams, kModes.mppt, kUnsafeDpd, IntegratorConfig{});
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_Rk4Oracle)->Unit(benchmark::kMillisecond);

void BM_CriticalDeadband(benchmark::State& state) {
  for (auto _ : state) {
    auto c = compute_critical_deadband(kUnsafeDpd, kParams, kModes, SafetyLimits{},
                                       IntegratorConfig{});
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_CriticalDeadband)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
