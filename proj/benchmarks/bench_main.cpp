#include <benchmark/benchmark.h>

#include <vector>

#include "aeds/eds.hpp"
#include "aeds/ip.hpp"
#include "aeds/odesim.hpp"
#include "aeds/solver.hpp"
#include "fixtures.hpp"

using namespace aeds;

namespace {

std::vector<std::vector<std::vector<double>>> so3_constants() {
  return structure_constants(3, {{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {2, 0, 1, 1.0}});
}

std::vector<Expr> rigid_body_gamma() {
  const Chart c = ip_chart(3);
  return {parse("-w2*w3", c), parse("w3*w1", c), parse("-w1*w2/3", c)};
}

void BM_ExteriorDerivative(benchmark::State& state) {
  const Algebroid alg = fx::frame_r3();
  SplitMix64 rng(7);
  const Form w = fx::random_form(rng, alg, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(exterior_derivative(w));
}
BENCHMARK(BM_ExteriorDerivative)->Arg(0)->Arg(1)->Arg(2);

void BM_BuildIp(benchmark::State& state) {
  const auto C = so3_constants();
  const auto gamma = rigid_body_gamma();
  for (auto _ : state) benchmark::DoNotOptimize(build_ip(3, C, gamma));
}
BENCHMARK(BM_BuildIp);

void BM_BracketChecks(benchmark::State& state) {
  const IpData ip = build_ip(3, so3_constants(), rigid_body_gamma());
  for (auto _ : state) benchmark::DoNotOptimize(bracket_table_checks(ip, SampleSpec{}));
}
BENCHMARK(BM_BracketChecks);

void BM_SearchLine(benchmark::State& state) {
  const IpData ip = build_ip(1, structure_constants(1, {}), {Expr(0)});
  SearchOptions opt;
  opt.max_degree = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(search_multiplier(ip, opt, SampleSpec{}));
}
BENCHMARK(BM_SearchLine)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SearchHeisenberg(benchmark::State& state) {
  const IpData ip = build_ip(3, structure_constants(3, {{0, 2, 1, 1.0}}), {Expr(0), Expr(0), Expr(0)});
  SearchOptions opt;
  opt.max_degree = 0;
  for (auto _ : state) benchmark::DoNotOptimize(search_multiplier(ip, opt, SampleSpec{}));
}
BENCHMARK(BM_SearchHeisenberg)->Unit(benchmark::kMillisecond);

void BM_Rk4(benchmark::State& state) {
  const Chart c({"t", "r", "eps"});
  const OdeSystem sys(c, {parse("r", c), parse("-r^2", c)});
  const std::vector<double> x0{1.2, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(rk4(sys, x0, 0.0, 1.0, 1e-3));
}
BENCHMARK(BM_Rk4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
