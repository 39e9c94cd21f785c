#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rulepref/discretize.hpp"

namespace rulepref::rulegen {

using data::ItemId;
using Transaction = std::vector<ItemId>;

struct FrequentItemset {
  std::vector<ItemId> items;  // strictly increasing
  std::size_t count = 0;

  bool operator==(const FrequentItemset&) const = default;
};

struct MiningOptions {
  // Longest itemset to report; 0 means unbounded.
  std::size_t max_length = 0;
  // group[item] labels mutually exclusive items (one per feature); items
  // sharing a group never appear together. Empty: no exclusivity.
  std::vector<std::size_t> item_group;
};

// Level-wise Apriori: frequent k-itemsets are joined on their common
// (k-1)-prefix, candidates with an infrequent (k-1)-subset are pruned, and
// survivors are counted by intersecting tid bitsets. Output is ordered by
// (length, items) and excludes the empty itemset.
std::vector<FrequentItemset> mine_frequent_itemsets(std::span<const Transaction> transactions,
                                                    std::size_t num_items, std::size_t min_support_count,
                                                    const MiningOptions& options = {});

// Itemized rows over a discretization; exclusivity by feature is implied.
std::vector<FrequentItemset> mine_frequent_itemsets(std::span<const data::ItemVector> itemized,
                                                    const data::DiscretizationSchema& schema,
                                                    std::size_t min_support_count, std::size_t max_length = 0);

// Packed row-membership bitset.
class TidSet {
 public:
  TidSet() = default;
  explicit TidSet(std::size_t rows) : rows_(rows), words_((rows + 63) / 64, 0) {}

  void set(std::size_t row) { words_[row >> 6] |= std::uint64_t{1} << (row & 63); }
  bool test(std::size_t row) const { return (words_[row >> 6] >> (row & 63)) & 1U; }
  std::size_t count() const noexcept;
  std::size_t rows() const noexcept { return rows_; }
  TidSet& operator&=(const TidSet& other);
  std::size_t intersection_count(const TidSet& other) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace rulepref::rulegen
