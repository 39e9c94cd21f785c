#include <gtest/gtest.h>

#include <cmath>

#include "rulepref/error.hpp"
#include "rulepref/hit_and_run.hpp"
#include "rulepref/personalize.hpp"
#include "test_support.hpp"

namespace rulepref::prefmodel {
namespace {

PreferencePolytope simplex(std::size_t dims) {
  PreferencePolytope p;
  p.dims = dims;
  for (std::size_t j = 0; j < dims; ++j) {
    PolytopeRow r;
    r.kind = PolytopeRow::Kind::bound;
    r.coeffs.assign(dims, 0.0);
    r.coeffs[j] = 1.0;
    p.rows.push_back(r);
  }
  return p;
}

std::vector<double> means(const WeightSampleSet& s) {
  std::vector<double> m(s.dims, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.dims; ++j) m[j] += s.sample(i)[j];
  for (auto& v : m) v /= static_cast<double>(s.size());
  return m;
}

SamplerOptions opts(std::size_t n, std::uint64_t seed = 1) {
  SamplerOptions o;
  o.samples = n;
  o.seed = seed;
  return o;
}

TEST(HitAndRun, FullSimplexMeans) {
  for (std::size_t dims : {3u, 6u, 12u}) {
    const auto p = simplex(dims);
    const std::vector<double> start(dims, 1.0 / static_cast<double>(dims));
    auto o = opts(10000, dims);
    o.thinning = dims;  // unthinned chains in 12 dims sit near the tolerance
    const auto s = hit_and_run(p, start, o);
    ASSERT_EQ(s.size(), 10000u);
    for (double m : means(s)) EXPECT_NEAR(m, 1.0 / static_cast<double>(dims), 0.02) << "dims " << dims;
  }
}

TEST(HitAndRun, HalfConstraintOnTwoSimplex) {
  auto p = simplex(2);
  PolytopeRow r;
  r.coeffs = {1.0, 0.0};
  r.rhs = 0.5;
  p.rows.push_back(r);
  const std::vector<double> start = {0.75, 0.25};
  const auto s = hit_and_run(p, start, opts(10000));
  for (std::size_t i = 0; i < s.size(); ++i) ASSERT_GE(s.sample(i)[0], 0.5 - 1e-9);
  EXPECT_NEAR(means(s)[0], 0.75, 0.02);
}

TEST(HitAndRun, HalfConstraintOnThreeComponents) {
  // Uniform on {w1 >= 1/2} of the triangle: the sub-triangle's barycenter.
  auto p = simplex(3);
  PolytopeRow r;
  r.coeffs = {1.0, 0.0, 0.0};
  r.rhs = 0.5;
  p.rows.push_back(r);
  const std::vector<double> start = {0.7, 0.15, 0.15};
  const auto s = hit_and_run(p, start, opts(10000));
  EXPECT_NEAR(means(s)[0], 2.0 / 3.0, 0.02);
}

TEST(HitAndRun, ZeroSamplesIsValid) {
  const auto s = hit_and_run(simplex(4), std::vector<double>(4, 0.25), opts(0));
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.size(), 0u);
}

TEST(HitAndRun, DeterministicForSeed) {
  const auto p = simplex(5);
  const std::vector<double> start(5, 0.2);
  EXPECT_EQ(hit_and_run(p, start, opts(100, 3)).values, hit_and_run(p, start, opts(100, 3)).values);
  EXPECT_NE(hit_and_run(p, start, opts(100, 3)).values, hit_and_run(p, start, opts(100, 4)).values);
}

TEST(HitAndRun, RejectsBoundaryStart) {
  const std::vector<double> start = {1.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(hit_and_run(simplex(4), start, opts(10)), ContractError);
  EXPECT_THROW(hit_and_run(simplex(4), std::vector<double>(4, 0.3), opts(10)), ContractError);
}

TEST(HitAndRun, DegenerateSliverIsReported) {
  // Slack of a few ulps: the start is strictly interior but every chord is shorter than 1e-15.
  auto p = simplex(2);
  PolytopeRow a, b;
  a.coeffs = {1.0, -1.0};
  b.coeffs = {-1.0, 1.0};
  b.rhs = -std::ldexp(1.0, -51);
  p.rows.push_back(a);
  p.rows.push_back(b);
  const std::vector<double> start{0.5 + std::ldexp(1.0, -53), 0.5 - std::ldexp(1.0, -53)};
  ASSERT_GT(p.min_slack(start), 0.0);
  EXPECT_THROW(hit_and_run(p, start, opts(10)), NumericalError);
}

TEST(HitAndRun, WorkedSamplesAreCompatible) {
  const auto rules = testing::worked_rules();
  const auto fm = feature_map(rules.rules(), rules.schema().size());
  const ReferenceRanking ref(testing::reference_order());
  const auto interior = solve_lp(build_polytope(ref, fm, PolytopeMode::interior));
  const auto margin = solve_lp(build_polytope(ref, fm, PolytopeMode::max_margin));
  ASSERT_EQ(interior.status, LpStatus::optimal);
  ASSERT_EQ(margin.status, LpStatus::optimal);
  std::vector<double> start(interior.weights->flat().size());
  for (std::size_t i = 0; i < start.size(); ++i)
    start[i] = 0.5 * (interior.weights->flat()[i] + margin.weights->flat()[i]);
  const auto p = build_polytope(ref, fm, PolytopeMode::max_margin);
  const auto s = hit_and_run(p, start, opts(3000, 7));
  for (std::size_t i = 0; i < s.size(); ++i) {
    ASSERT_TRUE(p.contains(s.sample(i), 1e-9)) << "sample " << i;
    const WeightVector w(std::vector<double>(s.sample(i).begin(), s.sample(i).end()));
    for (std::size_t k = 0; k + 1 < ref.size(); ++k)
      ASSERT_GE(prus_score(fm.at(ref.ids()[k]), w), prus_score(fm.at(ref.ids()[k + 1]), w) - 1e-9);
  }
  EXPECT_TRUE(p.contains(centroid(s).flat(), 1e-9));
}

WeightSampleSet manual(std::size_t dims, std::vector<double> values) {
  WeightSampleSet s;
  s.dims = dims;
  s.values = std::move(values);
  return s;
}

TEST(Centroid, Examples) {
  EXPECT_EQ(centroid(manual(4, {1, 0, 0, 0, 0, 1, 0, 0})).flat(), (std::vector<double>{0.5, 0.5, 0, 0}));
  const std::vector<double> w = {0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(centroid(manual(4, {0.1, 0.2, 0.3, 0.4, 0.1, 0.2, 0.3, 0.4})).flat(), w);
  EXPECT_THROW(centroid(manual(4, {})), ContractError);
}

TEST(Centroid, FullSimplexBarycenter) {
  const auto s = hit_and_run(simplex(6), std::vector<double>(6, 1.0 / 6.0), opts(10000, 11));
  const auto c = centroid(s);
  for (double v : c.flat()) EXPECT_NEAR(v, 1.0 / 6.0, 0.02);
}

TEST(FirstRules, Examples) {
  FeatureMap one;
  one[4] = RuleFeatureVector{{1}, 0.2, 0.1, 1.0};
  const auto s = manual(4, {1, 0, 0, 0, 0, 1, 0, 0});
  EXPECT_EQ(first_rules(s, one), (std::vector<RuleId>{4}));

  FeatureMap two;
  two[0] = RuleFeatureVector{{1}, 0.0, 0.0, 1.0};
  two[1] = RuleFeatureVector{{0}, 1.0, 0.0, 1.0};
  EXPECT_EQ(first_rules(s, two), (std::vector<RuleId>{0, 1}));
  EXPECT_EQ(first_rules(manual(4, {1, 0, 0, 0}), two), (std::vector<RuleId>{0}));

  FeatureMap dom;
  dom[2] = RuleFeatureVector{{1}, 0.5, 0.5, 0.5};
  dom[3] = RuleFeatureVector{{0}, 0.2, 0.1, 1.0};
  const auto interior = hit_and_run(simplex(4), std::vector<double>(4, 0.25), opts(500));
  EXPECT_EQ(first_rules(interior, dom), (std::vector<RuleId>{2}));
}

TEST(FirstRules, TiesAtTheTopAllCount) {
  FeatureMap m;
  m[0] = RuleFeatureVector{{1}, 0.0, 0.0, 1.0};
  m[1] = RuleFeatureVector{{0}, 1.0, 0.0, 1.0};
  EXPECT_EQ(first_rules(manual(4, {0.5, 0.5, 0, 0}), m), (std::vector<RuleId>{0, 1}));
}

TEST(SamplerOptions, JsonKeys) {
  const auto o = nlohmann::json{{"n", 50}, {"burn_in", 5}, {"seed", 9}}.get<SamplerOptions>();
  EXPECT_EQ(o.samples, 50u);
  EXPECT_EQ(o.burn_in, 5u);
  EXPECT_EQ(o.seed, 9u);
  SamplerOptions bad;
  bad.thinning = 0;
  EXPECT_THROW(bad.validate(), ContractError);
}

TEST(Personalize, WorkedStrategies) {
  const auto rules = testing::worked_rules();
  const auto fm = feature_map(rules.rules(), rules.schema().size());
  FitOptions o;
  o.sampler = opts(2000, 5);
  const auto fit = personalize(fm, ReferenceRanking(testing::reference_order()), o);
  ASSERT_EQ(fit.results.size(), 3u);
  const auto* me = fit.find(Strategy::max_eps);
  ASSERT_TRUE(me && me->available);
  std::vector<RuleId> top;
  for (const auto& s : me->ranking) top.push_back(s.id);
  EXPECT_EQ(top, testing::fitted_order());
  const auto* hc = fit.find(Strategy::hr_centroid);
  ASSERT_TRUE(hc && hc->available);
  EXPECT_EQ(hc->ranking.size(), 15u);
  const auto* fr = fit.find(Strategy::hr_first_rules);
  ASSERT_TRUE(fr && fr->available);
  EXPECT_FALSE(fr->first_rules.empty());
  EXPECT_TRUE(fr->ranking.empty());
}

TEST(Personalize, InfeasibleReference) {
  FeatureMap m;
  m[0] = RuleFeatureVector{{1}, 0.6, 0.7, 0.5};
  m[1] = RuleFeatureVector{{0}, 0.2, 0.1, 1.0};
  EXPECT_THROW(personalize(m, ReferenceRanking({1, 0}), FitOptions{}), InfeasibleError);
}

TEST(Personalize, WeakReferenceDisablesSampling) {
  FeatureMap m;
  m[0] = RuleFeatureVector{{1}, 0.6, 0.7, 1.0};
  m[1] = m[0];
  FitOptions o;
  o.sampler = opts(100);
  const auto fit = personalize(m, ReferenceRanking({0, 1}), o);
  EXPECT_TRUE(fit.find(Strategy::max_eps)->weak);
  EXPECT_FALSE(fit.find(Strategy::hr_centroid)->available);
  EXPECT_FALSE(fit.find(Strategy::hr_centroid)->unavailable_reason.empty());
}

TEST(Strategy, Names) {
  for (auto s : all_strategies()) EXPECT_EQ(strategy_from_string(to_string(s)), s);
  EXPECT_THROW(strategy_from_string("greedy"), ContractError);
}

}  // namespace
}  // namespace rulepref::prefmodel
