#include <benchmark/benchmark.h>

#include <random>

#include "vrcp/attacks.hpp"
#include "vrcp/conformal.hpp"
#include "vrcp/random.hpp"
#include "vrcp/robust.hpp"
#include "vrcp/trainer.hpp"
#include "vrcp/verifier.hpp"

namespace {

vrcp::Network mlp(std::size_t width, std::size_t depth) {
  vrcp::Architecture arch;
  arch.input_dim = 8;
  arch.hidden = std::vector<std::size_t>(depth, width);
  arch.output_dim = 3;
  return vrcp::init_network(arch, 1);
}

vrcp::Vector point(std::size_t d, std::uint64_t seed) {
  vrcp::Rng rng(seed);
  vrcp::Vector x(d);
  for (double& v : x) v = vrcp::uniform(rng, 0, 1);
  return x;
}

void BM_Ibp(benchmark::State& state) {
  const vrcp::Network net = mlp(static_cast<std::size_t>(state.range(0)), 2);
  const vrcp::PerturbationBall ball(point(8, 2), 0.05, vrcp::Norm::linf);
  for (auto _ : state) benchmark::DoNotOptimize(vrcp::ibp_bounds(net, ball));
}
BENCHMARK(BM_Ibp)->Arg(16)->Arg(64)->Arg(256);

void BM_Crown(benchmark::State& state) {
  const vrcp::Network net = mlp(static_cast<std::size_t>(state.range(0)), 2);
  const vrcp::PerturbationBall ball(point(8, 2), 0.05, vrcp::Norm::linf);
  for (auto _ : state) benchmark::DoNotOptimize(vrcp::crown_bounds(net, ball));
}
BENCHMARK(BM_Crown)->Arg(16)->Arg(64)->Arg(256);

void BM_Pgd(benchmark::State& state) {
  vrcp::Architecture arch;
  arch.input_dim = 8;
  arch.hidden = {16, 16};
  arch.output_dim = 3;
  arch.softmax_output = true;
  const vrcp::Network net = vrcp::init_network(arch, 3);
  const vrcp::Vector x = point(8, 4);
  vrcp::AttackConfig cfg;
  cfg.epsilon = 0.05;
  cfg.steps = static_cast<int>(state.range(0));
  cfg.step_size = 2.5 * cfg.epsilon / cfg.steps;
  for (auto _ : state) benchmark::DoNotOptimize(vrcp::pgd(net, x, 0, cfg));
}
BENCHMARK(BM_Pgd)->Arg(20)->Arg(100);

void BM_ConformalQuantile(benchmark::State& state) {
  std::vector<double> scores(static_cast<std::size_t>(state.range(0)));
  vrcp::Rng rng(5);
  for (double& s : scores) s = vrcp::uniform(rng, 0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(vrcp::conformal_quantile(scores, 0.1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConformalQuantile)->RangeMultiplier(10)->Range(100, 100000)->Complexity();

void BM_RobustSet(benchmark::State& state) {
  vrcp::Architecture arch;
  arch.input_dim = 8;
  arch.hidden = {16, 16};
  arch.output_dim = 3;
  arch.softmax_output = true;
  const vrcp::Network net = vrcp::init_network(arch, 6);
  const vrcp::PerturbationBall ball(point(8, 7), 0.05, vrcp::Norm::linf);
  const auto q = vrcp::CriticalValue::finite(0.6, 0.1, 500);
  const auto method = static_cast<vrcp::BoundMethod>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(vrcp::vrcp_i_set_class(net, ball, q, method));
  state.SetLabel(vrcp::to_string(method));
}
BENCHMARK(BM_RobustSet)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
