#include "benson/engine.hpp"
#include "benson/io.hpp"
#include "benson/polyhedron.hpp"

#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include <random>
#include <string>

using namespace benson;

namespace {

// Tangent halfspaces of the unit sphere shifted into the positive orthant,
// plus the orthant itself: an upper set with many vertices.
HRep sphere_cuts(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  HRep h;
  for (int j = 0; j < dim; ++j) h.halfspaces.push_back({Vec::Unit(dim, j), 0.0});
  for (int k = 0; k < count; ++k) {
    Vec a(dim);
    for (int j = 0; j < dim; ++j) a(j) = std::abs(g(rng)) + 1e-3;
    a.normalize();
    h.halfspaces.push_back({a, a.sum() - 1.0});
  }
  return h;
}

void BM_VertexEnumeration(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const HRep h = sphere_cuts(dim, static_cast<int>(state.range(1)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_vertices(h, dim));
}
BENCHMARK(BM_VertexEnumeration)->Args({2, 64})->Args({3, 32})->Args({3, 128})->Args({4, 32});

void BM_IncrementalInsertion(benchmark::State& state) {
  const HRep h = sphere_cuts(3, static_cast<int>(state.range(0)), 9);
  for (auto _ : state) {
    Polyhedron p(3);
    for (std::size_t i = 0; i < h.size(); ++i) {
      p.add_halfspace(h.halfspaces[i]);
      if (i >= 2) benchmark::DoNotOptimize(p.vrep());
    }
  }
}
BENCHMARK(BM_IncrementalInsertion)->Arg(32)->Arg(128);

void BM_Run(benchmark::State& state, const std::string& file, Algorithm alg, double eps) {
  spdlog::set_level(spdlog::level::err);
  const CvopProblem p = load_problem(std::string(BENSON_DATA_DIR) + "/" + file);
  const DualFrame frame = DualFrame::for_problem(p);
  RunConfig cfg;
  cfg.epsilon = eps;
  cfg.algorithm = alg;
  int solves = 0;
  for (auto _ : state) solves = run(p, frame, cfg).stats.num_scalar_solves;
  state.counters["solves"] = solves;
}
BENCHMARK_CAPTURE(BM_Run, disk_primal, "example1.json", Algorithm::Primal, 0.001)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, disk_dual, "example1.json", Algorithm::Dual, 0.001)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, abs_primal, "example2.json", Algorithm::Primal, 0.01)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Run, exp_primal, "example3.json", Algorithm::Primal, 0.1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
