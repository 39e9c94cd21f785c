#include <benchmark/benchmark.h>

#include <filesystem>

#include "rulepref/apriori.hpp"
#include "rulepref/data.hpp"
#include "rulepref/discretize.hpp"
#include "rulepref/rulegen.hpp"

namespace {

using namespace rulepref;

const data::Dataset& wisconsin() {
  static const data::Dataset ds =
      data::load_dataset(std::filesystem::path(RULEPREF_BENCH_DATA_DIR) / "wisconsin_original.csv").dataset;
  return ds;
}

void BM_FrequentItemsets(benchmark::State& state) {
  const auto& ds = wisconsin();
  const auto disc = data::fit_discretizer(ds, 3);
  const auto itemized = data::itemize_all(ds, disc);
  const auto min_count = static_cast<std::size_t>(state.range(0));
  std::size_t found = 0;
  for (auto _ : state) {
    const auto sets = rulegen::mine_frequent_itemsets(itemized, disc, min_count);
    found = sets.size();
    benchmark::DoNotOptimize(sets.data());
  }
  state.counters["itemsets"] = static_cast<double>(found);
}
BENCHMARK(BM_FrequentItemsets)->Arg(3)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_MineRules(benchmark::State& state) {
  rulegen::InductionParams p;
  p.min_support_count = static_cast<std::size_t>(state.range(0));
  std::size_t found = 0;
  for (auto _ : state) {
    const auto rs = rulegen::mine_rules(wisconsin(), p);
    found = rs.size();
    benchmark::DoNotOptimize(found);
  }
  state.counters["rules"] = static_cast<double>(found);
}
BENCHMARK(BM_MineRules)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_CoveringRules(benchmark::State& state) {
  rulegen::InductionParams p;
  p.min_support_count = 3;
  const auto rs = rulegen::mine_rules(wisconsin(), p);
  const auto& ds = wisconsin();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto covering = rulegen::covering_rules(rs, ds.row(i), ds.label(i));
    benchmark::DoNotOptimize(covering.data());
    i = (i + 1) % ds.n();
  }
}
BENCHMARK(BM_CoveringRules)->Unit(benchmark::kMicrosecond);

}  // namespace
