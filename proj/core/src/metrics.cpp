#include "rulepref/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "rulepref/error.hpp"

namespace rulepref::evalsuite {

namespace {

// Inversions of v, sorting it in place.
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf) {
  std::uint64_t inversions = 0;
  const std::size_t n = v.size();
  buf.resize(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return inversions;
}

// Pairs tied within runs of equal values of a sorted sequence.
template <typename It, typename Eq>
std::uint64_t tied_pairs(It first, It last, Eq eq) {
  std::uint64_t ties = 0;
  while (first != last) {
    It run = first;
    std::uint64_t len = 0;
    while (run != last && eq(*run, *first)) {
      ++run;
      ++len;
    }
    ties += len * (len - 1) / 2;
    first = run;
  }
  return ties;
}

}  // namespace

double kendall_tau_a(std::span<const ItemKey> order_u, std::span<const ItemKey> order_v) {
  const std::size_t n = order_u.size();
  if (n != order_v.size()) throw ContractError("rankings differ in length");
  if (n < 2) throw ContractError("Kendall tau needs at least 2 items");
  std::unordered_map<ItemKey, std::size_t> pos_v;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pos_v.emplace(order_v[i], i).second) throw ContractError("duplicate item in ranking");
  }
  std::vector<double> seq(n);
  std::unordered_set<ItemKey> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen.insert(order_u[i]).second) throw ContractError("duplicate item in ranking");
    const auto it = pos_v.find(order_u[i]);
    if (it == pos_v.end()) throw ContractError("rankings cover different item sets");
    seq[i] = static_cast<double>(it->second);
  }
  std::vector<double> buf;
  const double discordant = static_cast<double>(count_inversions(seq, buf));
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return (pairs - 2.0 * discordant) / pairs;
}

std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw ContractError("vectors differ in length");
  if (n < 2) throw ContractError("Kendall tau needs at least 2 values");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  const std::uint64_t ties_x =
      tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
  const std::uint64_t ties_xy = tied_pairs(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] == x[b] && y[a] == y[b];
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  std::vector<double> buf;
  // Sorting by (x, y) makes x-ties contribute no inversions.
  const std::uint64_t swaps = count_inversions(ys, buf);
  const std::uint64_t ties_y = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const double concordant_minus_discordant = static_cast<double>(pairs) - static_cast<double>(ties_x) -
                                             static_cast<double>(ties_y) + static_cast<double>(ties_xy) -
                                             2.0 * static_cast<double>(swaps);
  const double denom = std::sqrt(static_cast<double>(pairs - ties_x) * static_cast<double>(pairs - ties_y));
  if (denom == 0.0) return std::nullopt;
  return concordant_minus_discordant / denom;
}

double jaccard(std::span<const ItemKey> a, std::span<const ItemKey> b) {
  std::vector<ItemKey> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::vector<ItemKey> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const double inter = static_cast<double>(common.size());
  return inter / (static_cast<double>(sa.size() + sb.size()) - inter);
}

double jaccard_top_k(std::span<const ItemKey> rank_a, std::span<const ItemKey> rank_b, std::size_t k) {
  if (k == 0) throw ContractError("k must be positive");
  if (k > rank_a.size() || k > rank_b.size()) throw ContractError("k exceeds a ranking length");
  return jaccard(rank_a.first(k), rank_b.first(k));
}

DiscoveryCounts discovery_counts(std::span<const ItemKey> final_ranking, std::span<const ItemKey> reference) {
  std::unordered_set<ItemKey> ref(reference.begin(), reference.end());
  std::unordered_set<ItemKey> present(final_ranking.begin(), final_ranking.end());
  for (ItemKey id : reference) {
    if (!present.count(id)) throw ContractError("reference rule " + std::to_string(id) + " missing from ranking");
  }
  DiscoveryCounts counts;
  bool seen_ref = false;
  for (std::size_t i = 0; i < final_ranking.size(); ++i) {
    const bool in_ref = ref.count(final_ranking[i]) > 0;
    seen_ref |= in_ref;
    if (!seen_ref && !in_ref) ++counts.above_best_ref;
    if (i < 5 && !in_ref) ++counts.new_in_top5;
  }
  return counts;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && v[idx[j]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("vectors differ in length");
  if (x.size() < 2) throw ContractError("Spearman correlation needs at least 2 values");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

bool preserves_order(std::span<const ItemKey> ranking, std::span<const ItemKey> subset) {
  std::unordered_map<ItemKey, std::size_t> pos;
  for (std::size_t i = 0; i < ranking.size(); ++i) pos.emplace(ranking[i], i);
  std::size_t last = 0;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const auto it = pos.find(subset[k]);
    if (it == pos.end()) return false;
    if (k > 0 && it->second < last) return false;
    last = it->second;
  }
  return true;
}

}  // namespace rulepref::evalsuite
