#include <benchmark/benchmark.h>

#include "drcal/calibrate.hpp"
#include "drcal/dataset.hpp"
#include "drcal/diff.hpp"
#include "drcal/dispatch.hpp"
#include "drcal/network_case.hpp"
#include "drcal/rng.hpp"
#include "drcal/schedule.hpp"
#include "drcal/solver.hpp"

namespace {

using namespace drcal;

NetworkCase bench_case() {
  static NetworkCase c = load_case(std::string(DRCAL_CASES_DIR) + "/ieee5.json");
  return c;
}

EmpiricalErrorModel bench_uq(const NetworkCase& grid) {
  Mat theta0(2, grid.n_wind);
  for (int j = 0; j < grid.n_wind; ++j) theta0.col(j) << 1.0, 2.0;
  Dataset uq = gen_synthetic_dataset(theta0, 20, 10.0, 7, DatasetRole::uq);
  EmpiricalErrorModel m = empirical_errors(theta0, uq);
  m.epsilon = Vec::Constant(grid.n_wind, 1.0);
  return m;
}

void BM_SolveRandomLp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(42);
  StandardFormProgram p;
  p.linear_cost = Vec(n);
  for (int i = 0; i < n; ++i) p.linear_cost[i] = rng.uniform(-1, 1);
  std::vector<Triplet> trips;
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, 1.0);
    trips.emplace_back(n + i, i, -1.0);
  }
  p.ineq_matrix = SpMat(2 * n, n);
  p.ineq_matrix.setFromTriplets(trips.begin(), trips.end());
  p.ineq_rhs = Vec::Ones(2 * n);
  p.eq_matrix = SpMat(0, n);
  p.eq_rhs = Vec(0);
  for (auto _ : state) {
    SolverSolution s = solve(p);
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_SolveRandomLp)->Arg(20)->Arg(100);

void BM_ScheduleSolve(benchmark::State& state) {
  NetworkCase grid = bench_case();
  EmpiricalErrorModel uq = bench_uq(grid);
  Vec fc = Vec::Constant(grid.n_wind, 120.0);
  for (auto _ : state) {
    ScheduleSolution s = solve_schedule(grid, fc, uq);
    benchmark::DoNotOptimize(s.objective_total);
  }
}
BENCHMARK(BM_ScheduleSolve);

void BM_ScheduleJacobians(benchmark::State& state) {
  NetworkCase grid = bench_case();
  EmpiricalErrorModel uq = bench_uq(grid);
  Vec fc = Vec::Constant(grid.n_wind, 120.0);
  LayerConfig cfg;
  for (auto _ : state) {
    auto [s, jac] = schedule_jacobians(grid, fc, uq, cfg);
    benchmark::DoNotOptimize(jac.dG_dyhat(0, 0));
  }
}
BENCHMARK(BM_ScheduleJacobians);

void BM_Dispatch(benchmark::State& state) {
  NetworkCase grid = bench_case();
  EmpiricalErrorModel uq = bench_uq(grid);
  Vec fc = Vec::Constant(grid.n_wind, 120.0);
  ScheduleSolution sched = solve_schedule(grid, fc, uq);
  Vec realized = Vec::Constant(grid.n_wind, 95.0);
  for (auto _ : state) {
    DispatchSolution d = solve_dispatch(grid, sched, realized);
    benchmark::DoNotOptimize(d.cost);
  }
}
BENCHMARK(BM_Dispatch);

}  // namespace

BENCHMARK_MAIN();
