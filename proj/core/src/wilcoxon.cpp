#include "rulepref/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rulepref/error.hpp"

namespace rulepref::evalsuite {

namespace {

// Average ranks (1-based) of |d|.
std::vector<double> abs_ranks(const std::vector<double>& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(d[idx[j]]) == std::abs(d[idx[i]])) ++j;
    const double r = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    const WilcoxonOptions& options) {
  if (a.size() != b.size()) throw ContractError("paired samples differ in length");
  std::vector<double> diffs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];

  std::vector<double> d, ranks;
  if (options.zero_policy == ZeroPolicy::pratt) {
    const auto all = abs_ranks(diffs);
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      if (diffs[i] != 0.0) {
        d.push_back(diffs[i]);
        ranks.push_back(all[i]);
      }
    }
  } else {
    for (double v : diffs) {
      if (v != 0.0) d.push_back(v);
    }
    ranks = abs_ranks(d);
  }
  if (d.empty()) throw ContractError("no nonzero differences");
  if (d.size() < 5) throw ContractError("fewer than 5 nonzero differences");

  WilcoxonResult res;
  res.n = d.size();
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];
  res.statistic = std::min(res.w_plus, res.w_minus);

  if (res.n <= options.exact_max_n) {
    // Null distribution of W+ over the 2^n sign patterns, on doubled ranks.
    std::vector<long> doubled(ranks.size());
    long total = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      doubled[i] = std::lround(2.0 * ranks[i]);
      total += doubled[i];
    }
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (long r : doubled) {
      for (long s = reach; s >= 0; --s) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      reach += r;
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(res.n));
    const long observed = std::lround(2.0 * res.w_plus);
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= total; ++s) {
      if (s <= observed) lower += counts[static_cast<std::size_t>(s)];
      if (s >= observed) upper += counts[static_cast<std::size_t>(s)];
    }
    res.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / patterns);
    res.exact = true;
  } else {
    double mean = 0.0, var = 0.0;
    for (double r : ranks) {
      mean += r;
      var += r * r;
    }
    mean /= 2.0;
    var /= 4.0;
    const double dev = std::max(0.0, std::abs(res.w_plus - mean) - 0.5);
    const double z = var > 0.0 ? dev / std::sqrt(var) : 0.0;
    res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  res.significant_05 = res.p_value < 0.05;
  res.significant_01 = res.p_value < 0.01;
  res.significant_001 = res.p_value < 0.001;
  return res;
}

}  // namespace rulepref::evalsuite
