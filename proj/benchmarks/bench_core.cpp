#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "ncs/hinf/analysis.hpp"
#include "ncs/hinf/monte_carlo.hpp"
#include "ncs/hinf/synthesis.hpp"
#include "ncs/lmi/linear_matrix.hpp"
#include "ncs/lmi/sdp.hpp"
#include "ncs/mjls/stability.hpp"
#include "ncs/netproto/protocol.hpp"
#include "ncs/plant/two_tank.hpp"

using namespace ncs;
using Eigen::MatrixXd;

namespace {

mjls::MjlsModel tank() {
  plant::TankParams p{100, 100, 0.5, 0.4, 981, 50, 20, 2.0};
  return plant::to_mjls(plant::build_two_tank(p).discrete);
}

// Shift register scaled to radius 0.9: P - A^T P A >= I is feasible.
lmi::SdpProblem lyapunov(int n) {
  MatrixXd A = MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i + 1, i) = 0.9;
  A(0, n - 1) = 0.5;
  lmi::SdpBuilder b;
  const auto P = b.add_symmetric(n);
  const auto I = lmi::LinearMatrix::identity(n);
  b.require_psd(P - I);
  b.require_psd(P - A.transpose() * P * A - I);
  MatrixXd ones = MatrixXd::Ones(n, 1);
  b.minimize(ones.transpose() * P * ones);
  return b.problem();
}

}  // namespace

static void BM_SolveLyapunovSdp(benchmark::State& state) {
  const auto problem = lyapunov(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lmi::solve_sdp(problem));
}
BENCHMARK(BM_SolveLyapunovSdp)->DenseRange(2, 10, 4)->Unit(benchmark::kMillisecond);

static void BM_BrlAnalysisTankInterval(benchmark::State& state) {
  const auto model = tank();
  const auto closed = mjls::close_loop(model, {MatrixXd::Zero(2, 2)});
  const auto poly = hinf::success_interval_polytope(0.6, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(hinf::brl_analysis(closed, poly));
}
BENCHMARK(BM_BrlAnalysisTankInterval)->Unit(benchmark::kMillisecond);

static void BM_OptimalDesignTank(benchmark::State& state) {
  const auto model = tank();
  for (auto _ : state) benchmark::DoNotOptimize(hinf::optimal_design(model, 0.8));
}
BENCHMARK(BM_OptimalDesignTank)->Unit(benchmark::kMillisecond);

static void BM_McLowerBound(benchmark::State& state) {
  const auto model = tank();
  const auto closed = mjls::close_loop(model, {MatrixXd::Zero(2, 2)});
  const auto gamma = mjls::BernoulliRow::success(0.8).expand();
  hinf::MonteCarloOptions opts;
  opts.trials = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hinf::mc_lower_bound(closed, gamma, opts));
}
BENCHMARK(BM_McLowerBound)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_MssSpectralRadius(benchmark::State& state) {
  const auto closed = mjls::close_loop(tank(), {MatrixXd::Zero(2, 2)});
  const auto gamma = mjls::BernoulliRow::success(0.8).expand();
  for (auto _ : state) benchmark::DoNotOptimize(mjls::mss_spectral_radius(closed, gamma));
}
BENCHMARK(BM_MssSpectralRadius);

static void BM_EnumerateConfigurations(benchmark::State& state) {
  const int nodes = static_cast<int>(state.range(0));
  const auto chain = netproto::uniform_chain(nodes, 0.97);
  const auto policy = netproto::MntpPolicy::uniform(nodes, {1, 2}, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(netproto::enumerate_configurations(chain, policy));
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << nodes));
}
BENCHMARK(BM_EnumerateConfigurations)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
