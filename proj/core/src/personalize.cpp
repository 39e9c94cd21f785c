#include "rulepref/personalize.hpp"

#include "rulepref/error.hpp"

namespace rulepref::prefmodel {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::max_eps:
      return "max-eps";
    case Strategy::hr_centroid:
      return "hr-centroid";
    case Strategy::hr_first_rules:
      break;
  }
  return "hr-first-rules";
}

Strategy strategy_from_string(std::string_view text) {
  for (Strategy s : all_strategies()) {
    if (to_string(s) == text) return s;
  }
  throw ContractError("unknown strategy '" + std::string(text) + "'");
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> all = {Strategy::max_eps, Strategy::hr_centroid, Strategy::hr_first_rules};
  return all;
}

const StrategyResult* FitResult::find(Strategy s) const {
  for (const auto& r : results) {
    if (r.strategy == s) return &r;
  }
  return nullptr;
}

FitResult personalize(const FeatureMap& candidates, const ReferenceRanking& reference, const FitOptions& options) {
  if (options.strategies.empty()) throw ContractError("no strategy requested");
  options.sampler.validate();
  FitResult fit;
  fit.max_margin = solve_lp(build_polytope(reference, candidates, PolytopeMode::max_margin));
  if (fit.max_margin.status == LpStatus::infeasible) throw InfeasibleError();

  bool need_sampler = false;
  for (Strategy s : options.strategies) need_sampler |= s != Strategy::max_eps;

  std::optional<WeightSampleSet> samples;
  std::string sampler_error;
  if (need_sampler) {
    const auto interior_polytope = build_polytope(reference, candidates, PolytopeMode::interior);
    fit.interior = solve_lp(interior_polytope);
    if (fit.interior->status != LpStatus::optimal) {
      sampler_error = "no strictly positive compatible weight vector; only max-eps is available";
    } else {
      const auto& wi = fit.interior->weights->flat();
      if (fit.max_margin.status == LpStatus::optimal) {
        // The interior LP solution may sit on ranking faces and the margin
        // solution on weight faces; their midpoint clears both.
        const auto& wm = fit.max_margin.weights->flat();
        fit.sampler_start.resize(wi.size());
        for (std::size_t i = 0; i < wi.size(); ++i) fit.sampler_start[i] = 0.5 * (wi[i] + wm[i]);
      } else {
        fit.sampler_start = wi;
      }
      try {
        samples = hit_and_run(interior_polytope, fit.sampler_start, options.sampler);
      } catch (const Error& e) {
        sampler_error = e.what();
      }
    }
  }

  for (Strategy s : options.strategies) {
    StrategyResult r;
    r.strategy = s;
    if (s == Strategy::max_eps) {
      r.weights = fit.max_margin.weights;
      r.epsilon = fit.max_margin.epsilon;
      r.weak = fit.max_margin.status == LpStatus::weak;
      r.ranking = rank_rules(candidates, *r.weights);
    } else if (!samples || samples->empty()) {
      r.available = false;
      r.unavailable_reason = samples ? "sampler returned no samples" : sampler_error;
    } else if (s == Strategy::hr_centroid) {
      r.weights = centroid(*samples);
      r.epsilon = fit.interior->epsilon;
      r.ranking = rank_rules(candidates, *r.weights);
    } else {
      r.first_rules = first_rules(*samples, candidates);
    }
    fit.results.push_back(std::move(r));
  }
  return fit;
}

}  // namespace rulepref::prefmodel
