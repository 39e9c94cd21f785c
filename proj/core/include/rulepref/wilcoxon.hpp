#pragma once

#include <cstddef>
#include <span>

namespace rulepref::evalsuite {

enum class ZeroPolicy { wilcox, pratt };

struct WilcoxonOptions {
  ZeroPolicy zero_policy = ZeroPolicy::wilcox;
  std::size_t exact_max_n = 25;
};

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;  // nonzero differences
  bool exact = false;
  bool significant_05 = false;
  bool significant_01 = false;
  bool significant_001 = false;
};

// Two-sided signed-rank test on a_i - b_i.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    const WilcoxonOptions& options = {});

}  // namespace rulepref::evalsuite
