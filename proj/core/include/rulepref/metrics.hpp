#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rulepref::evalsuite {

using ItemKey = std::uint32_t;

// Kendall tau-a between two total orders over the same items.
double kendall_tau_a(std::span<const ItemKey> order_u, std::span<const ItemKey> order_v);

// Tie-corrected Kendall tau-b between paired values; nullopt when either
// vector is constant.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Jaccard index of the two top-k prefixes.
double jaccard_top_k(std::span<const ItemKey> rank_a, std::span<const ItemKey> rank_b, std::size_t k);

// Jaccard index of two sets given as (possibly unsorted) id lists.
double jaccard(std::span<const ItemKey> a, std::span<const ItemKey> b);

struct DiscoveryCounts {
  std::size_t above_best_ref = 0;
  std::size_t new_in_top5 = 0;

  bool operator==(const DiscoveryCounts&) const = default;
};

DiscoveryCounts discovery_counts(std::span<const ItemKey> final_ranking, std::span<const ItemKey> reference);

// Spearman rank correlation with average ranks for ties.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Ranking restricted to `subset` preserves the subset's order.
bool preserves_order(std::span<const ItemKey> ranking, std::span<const ItemKey> subset);

}  // namespace rulepref::evalsuite
