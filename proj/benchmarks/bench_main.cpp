#include <benchmark/benchmark.h>

#include <random>

#include "toy.hpp"
#include "treecon/crl.hpp"
#include "treecon/density.hpp"
#include "treecon/formula.hpp"
#include "treecon/navenv.hpp"
#include "treecon/octree.hpp"

using namespace treecon;

namespace {

const DnfFormula& toy_formula() {
  static const DnfFormula f = extract_formula(testing::two_box_tree(), FeatureBounds{{0.1, 0.1}, {0.9, 0.9}});
  return f;
}

void BM_Kde(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> s(static_cast<std::size_t>(state.range(0)));
  for (auto& x : s) x = g(rng);
  const double h = bandwidth_silverman(s);
  for (auto _ : state) benchmark::DoNotOptimize(kde_estimate(s, h, 256));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Kde)->Arg(500)->Arg(3000)->Arg(20000);

void BM_BuildToyTree(benchmark::State& state) {
  const Dataset d = testing::sample_toy_union(static_cast<std::size_t>(state.range(0)), 0);
  TreeConfig c;
  c.max_depth = 2;
  for (auto _ : state) benchmark::DoNotOptimize(build_tree(d, c));
}
BENCHMARK(BM_BuildToyTree)->Arg(3000)->Arg(30000)->Unit(benchmark::kMillisecond);

void BM_BuildDeepTree(benchmark::State& state) {
  const Dataset d = testing::random_clusters(static_cast<std::size_t>(state.range(0)), 2000, 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_tree(d, TreeConfig{}));
}
BENCHMARK(BM_BuildDeepTree)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Extract(benchmark::State& state) {
  const Dataset d = testing::random_clusters(4, 2000, 4);
  const Tree t = build_tree(d, TreeConfig{});
  const auto b = feature_bounds(d);
  for (auto _ : state) benchmark::DoNotOptimize(extract_formula(t, b));
}
BENCHMARK(BM_Extract);

void BM_Evaluate(benchmark::State& state) {
  const auto& f = toy_formula();
  ConjunctionStats stats(f.size());
  std::mt19937_64 rng(5);
  std::vector<FeatureVector> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back(testing::random_point(FeatureBounds{{0.1, 0.1}, {0.9, 0.9}}, 0.1, rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(f, pts[i++ & 1023], &stats));
}
BENCHMARK(BM_Evaluate);

void BM_Rollout(benchmark::State& state) {
  const nav::NavEnv env;
  const crl::Policy p;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(crl::rollout(env, p, toy_formula(), nullptr, seed++));
}
BENCHMARK(BM_Rollout);

void BM_TrainEpochs(benchmark::State& state) {
  const nav::NavEnv env;
  crl::TrainConfig c;
  c.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(crl::train(env, toy_formula(), c));
}
BENCHMARK(BM_TrainEpochs)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
