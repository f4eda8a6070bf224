#include <benchmark/benchmark.h>

#include "canard/curvature.hpp"
#include "canard/odeint.hpp"
#include "canard/pseudosing.hpp"

using namespace canard;

static void BM_FlowCurvatureChua3(benchmark::State& state) {
  const auto f = reduce(chua3());
  const std::vector<double> x = {0.3, 1.7};
  for (auto _ : state) benchmark::DoNotOptimize(flow_curvature(*f, x));
}
BENCHMARK(BM_FlowCurvatureChua3);

static void BM_CurvatureHessianChua4(benchmark::State& state) {
  const auto f = reduce(chua4());
  const std::vector<double> x = {0.1, 0.4, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(curvature_hessian_test(f, x));
}
BENCHMARK(BM_CurvatureHessianChua4);

static void BM_SearchChua3(benchmark::State& state) {
  const SlowFastSystem s = chua3();
  for (auto _ : state) benchmark::DoNotOptimize(find_pseudo_singular(s, SearchBox{}));
}
BENCHMARK(BM_SearchChua3)->Unit(benchmark::kMillisecond);

static void BM_IntegrateChua3(benchmark::State& state) {
  const SlowFastSystem s = chua3();
  const auto f = full_vector_field(s);
  const auto x0 = s.lift(std::vector<double>{0.0, 2.0});
  IntegrateOptions o;
  o.method = state.range(0) == 0 ? OdeMethod::DormandPrince : OdeMethod::RK4;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(*f, x0, 0.0, 10.0, o));
}
BENCHMARK(BM_IntegrateChua3)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
