#include <benchmark/benchmark.h>

#include <random>

#include "rulepref/hit_and_run.hpp"
#include "rulepref/personalize.hpp"
#include "rulepref/prefmodel.hpp"
#include "rulepref/random.hpp"
#include "rulepref/simulation.hpp"

namespace {

using namespace rulepref;
using prefmodel::FeatureMap;

constexpr std::size_t kFeatures = 9;

FeatureMap random_pool(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> supp(0.0, 0.6), conf(0.0, 1.0);
  FeatureMap pool;
  for (prefmodel::RuleId id = 0; id < n; ++id) {
    prefmodel::RuleFeatureVector rv;
    rv.conditions.assign(kFeatures, 0);
    std::size_t count = 0;
    for (auto& v : rv.conditions) count += (v = rng() % 3 == 0);
    if (count == 0) {
      rv.conditions[0] = 1;
      count = 1;
    }
    rv.support = supp(rng);
    rv.confirmation = conf(rng);
    rv.complexity_normalized = static_cast<double>(count) / kFeatures;
    pool[id] = rv;
  }
  return pool;
}

struct Problem {
  FeatureMap pool;
  prefmodel::ReferenceRanking reference;
};

Problem problem(std::size_t pool_size, std::size_t k) {
  auto pool = random_pool(pool_size, 7);
  const auto user = evalsuite::simulate_user(kFeatures + 3, 11);
  auto ref = evalsuite::reference_from_user(user, pool, k, 13);
  return {std::move(pool), std::move(ref)};
}

void BM_MaxMarginLp(benchmark::State& state) {
  const auto p = problem(40, static_cast<std::size_t>(state.range(0)));
  const auto polytope = prefmodel::build_polytope(p.reference, p.pool, prefmodel::PolytopeMode::max_margin);
  for (auto _ : state) {
    const auto r = prefmodel::solve_lp(polytope);
    benchmark::DoNotOptimize(r.epsilon);
  }
}
BENCHMARK(BM_MaxMarginLp)->Arg(4)->Arg(10)->Arg(14)->Unit(benchmark::kMicrosecond);

std::vector<double> interior_start(const Problem& p) {
  const auto inner = prefmodel::solve_lp(prefmodel::build_polytope(p.reference, p.pool, prefmodel::PolytopeMode::interior));
  const auto margin = prefmodel::solve_lp(prefmodel::build_polytope(p.reference, p.pool, prefmodel::PolytopeMode::max_margin));
  std::vector<double> start(kFeatures + 3);
  for (std::size_t i = 0; i < start.size(); ++i) start[i] = 0.5 * (inner.weights->flat()[i] + margin.weights->flat()[i]);
  return start;
}

void BM_HitAndRun(benchmark::State& state) {
  const auto p = problem(40, 10);
  const auto polytope = prefmodel::build_polytope(p.reference, p.pool, prefmodel::PolytopeMode::max_margin);
  const auto start = interior_start(p);
  prefmodel::SamplerOptions o;
  o.samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const auto s = prefmodel::hit_and_run(polytope, start, o);
    benchmark::DoNotOptimize(s.values.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(o.samples + o.burn_in));
}
BENCHMARK(BM_HitAndRun)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_RankRules(benchmark::State& state) {
  const auto pool = random_pool(static_cast<std::size_t>(state.range(0)), 3);
  const auto w = evalsuite::simulate_user(kFeatures + 3, 5).weights();
  for (auto _ : state) {
    const auto ranked = prefmodel::rank_rules(pool, w);
    benchmark::DoNotOptimize(ranked.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RankRules)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Personalize(benchmark::State& state) {
  const auto p = problem(static_cast<std::size_t>(state.range(0)), 10);
  prefmodel::FitOptions o;
  for (auto _ : state) {
    const auto fit = prefmodel::personalize(p.pool, p.reference, o);
    benchmark::DoNotOptimize(fit.results.data());
  }
}
BENCHMARK(BM_Personalize)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
