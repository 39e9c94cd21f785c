#include "rulepref/hit_and_run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rulepref/error.hpp"
#include "rulepref/random.hpp"

namespace rulepref::prefmodel {

namespace {

constexpr double kMinChord = 1e-15;
constexpr int kMaxDirectionRetries = 100;

double row_value(const PolytopeRow& row, std::span<const double> x) {
  double v = -row.rhs;
  for (std::size_t i = 0; i < x.size(); ++i) v += row.coeffs[i] * x[i];
  return v;
}

}  // namespace

void SamplerOptions::validate() const {
  if (thinning == 0) throw ContractError("thinning must be at least 1");
}

void to_json(nlohmann::json& j, const SamplerOptions& o) {
  j = {{"n", o.samples}, {"burn_in", o.burn_in}, {"thinning", o.thinning}, {"seed", o.seed}};
}

void from_json(const nlohmann::json& j, SamplerOptions& o) {
  try {
    if (j.contains("n")) o.samples = j.at("n").get<std::size_t>();
    if (j.contains("burn_in")) o.burn_in = j.at("burn_in").get<std::size_t>();
    if (j.contains("thinning")) o.thinning = j.at("thinning").get<std::size_t>();
    if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid sampler options: ") + e.what());
  }
  o.validate();
}

WeightSampleSet hit_and_run(const PreferencePolytope& polytope, std::span<const double> start,
                            const SamplerOptions& options) {
  options.validate();
  const std::size_t n = polytope.dims;
  if (start.size() != n) throw ContractError("start point dimension differs from polytope");
  double sum = 0.0;
  for (double v : start) sum += v;
  if (std::abs(sum - 1.0) > 1e-9) throw ContractError("infeasible start: weights do not sum to 1");
  if (!(polytope.min_slack(start) > 0.0)) throw ContractError("infeasible start: not strictly interior");

  WeightSampleSet out;
  out.dims = n;
  out.options = options;
  out.start.assign(start.begin(), start.end());
  if (options.samples == 0) return out;
  out.values.reserve(options.samples * n);

  Rng rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(start.begin(), start.end());
  std::vector<double> u(n);

  auto step = [&] {
    for (int attempt = 0; attempt < kMaxDirectionRetries; ++attempt) {
      double mean = 0.0;
      for (auto& v : u) {
        v = gauss(rng);
        mean += v;
      }
      mean /= static_cast<double>(n);
      double norm = 0.0;
      for (auto& v : u) {
        v -= mean;
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm < 1e-12) continue;
      for (auto& v : u) v /= norm;

      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (const auto& row : polytope.rows) {
        const double gx = std::max(0.0, row_value(row, x));
        double gu = 0.0;
        for (std::size_t i = 0; i < n; ++i) gu += row.coeffs[i] * u[i];
        if (gu > 0.0) {
          lo = std::max(lo, -gx / gu);
        } else if (gu < 0.0) {
          hi = std::min(hi, -gx / gu);
        }
      }
      if (!std::isfinite(lo) || !std::isfinite(hi)) throw NumericalError("polytope is unbounded along a direction");
      if (hi - lo <= kMinChord) continue;
      std::uniform_real_distribution<double> along(lo, hi);
      const double t = along(rng);
      for (std::size_t i = 0; i < n; ++i) x[i] += t * u[i];
      // Clip rounding excursions through a nonnegativity face and renormalize.
      double s = 0.0;
      for (auto& v : x) {
        v = std::max(v, 0.0);
        s += v;
      }
      for (auto& v : x) v /= s;
      return;
    }
    throw NumericalError("degenerate polytope: zero-length chord in every sampled direction");
  };

  for (std::size_t i = 0; i < options.burn_in; ++i) step();
  for (std::size_t i = 0; i < options.samples; ++i) {
    for (std::size_t t = 0; t < options.thinning; ++t) step();
    out.values.insert(out.values.end(), x.begin(), x.end());
  }
  return out;
}

WeightVector centroid(const WeightSampleSet& samples) {
  if (samples.empty()) throw ContractError("centroid of an empty sample set");
  std::vector<double> mean(samples.dims, 0.0);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto row = samples.sample(s);
    for (std::size_t i = 0; i < samples.dims; ++i) mean[i] += row[i];
  }
  double total = 0.0;
  for (auto& v : mean) {
    v /= static_cast<double>(samples.size());
    total += v;
  }
  for (auto& v : mean) v /= total;
  return WeightVector(std::move(mean));
}

std::vector<RuleId> first_rules(const WeightSampleSet& samples, const FeatureMap& candidates) {
  if (samples.empty() || candidates.empty()) throw ContractError("first rules needs samples and candidates");
  std::vector<RuleId> ids;
  std::vector<std::vector<double>> coeffs;
  for (const auto& [id, rv] : candidates) {
    ids.push_back(id);
    coeffs.push_back(rv.coefficients());
    if (coeffs.back().size() != samples.dims) throw ContractError("rule features and samples differ in dimension");
  }
  std::vector<bool> top(ids.size(), false);
  std::vector<double> scores(ids.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto w = samples.sample(s);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < ids.size(); ++r) {
      double v = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) v += coeffs[r][i] * w[i];
      scores[r] = v;
      best = std::max(best, v);
    }
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (scores[r] >= best - 1e-12) top[r] = true;
    }
  }
  std::vector<RuleId> out;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (top[r]) out.push_back(ids[r]);
  }
  return out;
}

nlohmann::json samples_to_json(const WeightSampleSet& samples) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto row = samples.sample(s);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"dims", samples.dims}, {"sampler", samples.options}, {"start", samples.start}, {"samples", rows}};
}

}  // namespace rulepref::prefmodel
