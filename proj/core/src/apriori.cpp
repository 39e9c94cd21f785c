#include "rulepref/apriori.hpp"

#include <algorithm>
#include <bit>

#include "rulepref/error.hpp"

namespace rulepref::rulegen {

std::size_t TidSet::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

TidSet& TidSet::operator&=(const TidSet& other) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

std::size_t TidSet::intersection_count(const TidSet& other) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) n += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  return n;
}

namespace {

struct LevelEntry {
  std::vector<ItemId> items;
  TidSet tids;
  std::size_t count;
};

}  // namespace

std::vector<FrequentItemset> mine_frequent_itemsets(std::span<const Transaction> transactions,
                                                    std::size_t num_items, std::size_t min_support_count,
                                                    const MiningOptions& options) {
  if (transactions.empty()) throw ContractError("no transactions to mine");
  if (min_support_count == 0) throw ContractError("min_support_count must be at least 1");
  if (!options.item_group.empty() && options.item_group.size() != num_items) {
    throw ContractError("item_group must label every item");
  }
  const auto group = [&](ItemId item) -> std::size_t {
    return options.item_group.empty() ? item : options.item_group[item];
  };

  const std::size_t rows = transactions.size();
  std::vector<TidSet> item_tids(num_items, TidSet(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (ItemId item : transactions[r]) {
      if (item >= num_items) throw ContractError("transaction item outside the universe");
      item_tids[item].set(r);
    }
  }

  std::vector<FrequentItemset> out;
  std::vector<LevelEntry> level;
  for (ItemId item = 0; item < num_items; ++item) {
    const std::size_t c = item_tids[item].count();
    if (c >= min_support_count) level.push_back({{item}, item_tids[item], c});
  }

  std::size_t length = 1;
  while (!level.empty()) {
    for (const auto& e : level) out.push_back({e.items, e.count});
    if (options.max_length != 0 && length >= options.max_length) break;

    // Level entries are lexicographically sorted; equal prefixes are adjacent.
    std::vector<LevelEntry> next;
    const std::size_t prefix = length - 1;
    auto in_level = [&level](const std::vector<ItemId>& items) {
      const auto it = std::lower_bound(level.begin(), level.end(), items,
                                       [](const LevelEntry& e, const std::vector<ItemId>& v) { return e.items < v; });
      return it != level.end() && it->items == items;
    };
    std::vector<ItemId> candidate(length + 1);
    std::vector<ItemId> subset(length);
    for (std::size_t i = 0; i < level.size();) {
      std::size_t end = i + 1;
      while (end < level.size() &&
             std::equal(level[i].items.begin(), level[i].items.begin() + static_cast<std::ptrdiff_t>(prefix),
                        level[end].items.begin())) {
        ++end;
      }
      for (std::size_t a = i; a < end; ++a) {
        for (std::size_t b = a + 1; b < end; ++b) {
          const ItemId last_a = level[a].items.back();
          const ItemId last_b = level[b].items.back();
          if (group(last_a) == group(last_b)) continue;
          std::copy(level[a].items.begin(), level[a].items.end(), candidate.begin());
          candidate.back() = last_b;
          // Downward closure: every (k-1)-subset must be frequent. The two
          // subsets dropping one of the last two items are the parents.
          bool keep = true;
          for (std::size_t drop = 0; keep && drop + 1 < length; ++drop) {
            std::size_t w = 0;
            for (std::size_t t = 0; t <= length; ++t) {
              if (t != drop) subset[w++] = candidate[t];
            }
            keep = in_level(subset);
          }
          if (!keep) continue;
          const std::size_t c = level[a].tids.intersection_count(level[b].tids);
          if (c < min_support_count) continue;
          TidSet tids = level[a].tids;
          tids &= level[b].tids;
          next.push_back({candidate, std::move(tids), c});
        }
      }
      i = end;
    }
    level = std::move(next);
    ++length;
  }
  return out;
}

std::vector<FrequentItemset> mine_frequent_itemsets(std::span<const data::ItemVector> itemized,
                                                    const data::DiscretizationSchema& schema,
                                                    std::size_t min_support_count, std::size_t max_length) {
  std::vector<Transaction> transactions;
  transactions.reserve(itemized.size());
  for (const auto& iv : itemized) {
    Transaction t = iv.items;
    std::sort(t.begin(), t.end());
    transactions.push_back(std::move(t));
  }
  MiningOptions options;
  options.max_length = max_length;
  options.item_group.resize(schema.item_count());
  for (ItemId item = 0; item < schema.item_count(); ++item) options.item_group[item] = schema.item_feature(item);
  return mine_frequent_itemsets(transactions, schema.item_count(), min_support_count, options);
}

}  // namespace rulepref::rulegen
