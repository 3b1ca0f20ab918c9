#include <benchmark/benchmark.h>

#include "gridh2/case_bank.hpp"
#include "gridh2/dynamics.hpp"
#include "gridh2/gramian.hpp"
#include "gridh2/harness.hpp"
#include "gridh2/optimize.hpp"
#include "gridh2/simulate.hpp"

namespace {

using namespace gridh2;

PowerNetwork network_of_size(std::size_t n) {
  RandomNetworkOptions o;
  o.min_nodes = o.max_nodes = n;
  Rng rng = make_rng(1, n);
  return random_connected_network(rng, o);
}

void BM_LyapunovSolve(benchmark::State& state) {
  const PowerNetwork net = network_of_size(static_cast<std::size_t>(state.range(0)));
  const DeflatedSystem sys = deflate(assemble(net, build_laplacian(net)));
  const Eigen::MatrixXd q = sys.r_r * sys.r_r.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_solve(sys.a_r, q));
}
BENCHMARK(BM_LyapunovSolve)->RangeMultiplier(2)->Range(4, 64);

void BM_H2Norm(benchmark::State& state) {
  const PowerNetwork net = network_of_size(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(h2_norm(net).h2_squared);
}
BENCHMARK(BM_H2Norm)->RangeMultiplier(2)->Range(4, 64);

void BM_EulerMaruyama(benchmark::State& state) {
  const PowerNetwork& net = find_case("triangle").network;
  const StateSpace ss = assemble(net, build_laplacian(net));
  SimulationConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 10.0;
  cfg.burn_in = 5.0;
  cfg.trials = static_cast<std::size_t>(state.range(0));
  cfg.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(euler_maruyama(ss, InitialCondition::at_rest(3), cfg).empirical_h2_squared);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10000);
}
BENCHMARK(BM_EulerMaruyama)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_AssignmentExhaustive(benchmark::State& state) {
  AssignmentProblem p;
  p.n_nodes = static_cast<std::size_t>(state.range(0));
  p.edge_susceptances = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(p.n_nodes - 1), 1.0, 2.0);
  p.theta_star = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.n_nodes));
  p.require_connected = true;
  for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(p).objective);
  state.counters["candidates"] = assignment_candidate_count(p);
}
BENCHMARK(BM_AssignmentExhaustive)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

void BM_Allocation(benchmark::State& state) {
  const CaseBankEntry& c = find_case("kundur-like");
  for (auto _ : state) benchmark::DoNotOptimize(solve_allocation(*c.presets.allocation, c.network).objective);
}
BENCHMARK(BM_Allocation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
