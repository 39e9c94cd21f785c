#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "rulepref/discretize.hpp"
#include "rulepref/error.hpp"
#include "test_support.hpp"

namespace rulepref::data {
namespace {

LoadReport load_text(const std::string& text, LoadOptions opts = {}) {
  std::istringstream in(text);
  return load_dataset(in, opts);
}

TEST(LoadDataset, InfersKindsFromMinimalFile) {
  const auto r = load_text("a,b,y\n1,x,0\n2,x,1\n");
  EXPECT_EQ(r.dataset.d(), 2u);
  EXPECT_EQ(r.dataset.n(), 2u);
  EXPECT_EQ(r.dataset.schema()[0].kind, FeatureKind::numeric);
  EXPECT_EQ(r.dataset.schema()[1].kind, FeatureKind::categorical);
  EXPECT_EQ(r.dataset.schema().label_name(), "y");
  EXPECT_EQ(r.dataset.labels(), (std::vector<int>{0, 1}));
}

TEST(LoadDataset, RejectsThreeLabelValues) {
  try {
    load_text("a,y\n1,p\n2,q\n3,r\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("non-binary label"), std::string::npos);
  }
}

TEST(LoadDataset, MissingLabelColumn) {
  LoadOptions opts;
  opts.label_column = "target";
  EXPECT_THROW(load_text("a,y\n1,0\n", opts), DataError);
}

TEST(LoadDataset, EmptyDatasetIsAnError) {
  EXPECT_THROW(load_text("a,y\n"), DataError);
}

TEST(LoadDataset, MalformedRowReportsIndex) {
  try {
    load_text("a,b,y\n1,2,0\n1,2\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(LoadDataset, DropsRowsWithMissingCells) {
  const auto r = load_text("a,b,y\n1,?,0\n2,3,1\n,4,0\n5,6,1\n");
  EXPECT_EQ(r.dataset.n(), 2u);
  EXPECT_EQ(r.dropped_missing, 2u);
}

TEST(LoadDataset, LexicographicLabelMapping) {
  const auto r = load_text("a,Class\n1,malignant\n2,benign\n");
  EXPECT_EQ(r.dataset.label_names().names[0], "benign");
  EXPECT_EQ(r.dataset.labels(), (std::vector<int>{1, 0}));
}

TEST(LoadDataset, SchemaHintForcesCategorical) {
  LoadOptions opts;
  opts.schema = FeatureSchema({{"a", FeatureKind::categorical}}, "y");
  const auto r = load_text("a,y\n1,0\n2,1\n", opts);
  EXPECT_EQ(r.dataset.schema()[0].kind, FeatureKind::categorical);
  EXPECT_EQ(std::get<std::string>(r.dataset.row(0)[0]), "1");
}

TEST(LoadDataset, SchemaHintRejectsUnparseableNumber) {
  LoadOptions opts;
  opts.schema = FeatureSchema({{"a", FeatureKind::numeric}}, "y");
  EXPECT_THROW(load_text("a,y\nzz,0\n2,1\n", opts), DataError);
}

TEST(LoadDataset, QuotedFields) {
  const auto r = load_text("name,y\n\"a, b\",0\n\"c \"\"d\"\"\",1\n");
  EXPECT_EQ(std::get<std::string>(r.dataset.row(0)[0]), "a, b");
  EXPECT_EQ(std::get<std::string>(r.dataset.row(1)[0]), "c \"d\"");
}

TEST(LoadDataset, WisconsinOriginal) {
  const auto r = load_dataset(testing::data_dir() / "wisconsin_original.csv");
  EXPECT_EQ(r.dataset.d(), 9u);
  EXPECT_EQ(r.dataset.n(), 683u);
  EXPECT_EQ(r.dropped_missing, 16u);
  EXPECT_EQ(r.dataset.label_names().names[0], "benign");
  EXPECT_EQ(r.dataset.label_names().names[1], "malignant");
  EXPECT_EQ(r.dataset.class_count(0), 444u);
  for (const auto& f : r.dataset.schema().features()) EXPECT_EQ(f.kind, FeatureKind::numeric);
}

TEST(FeatureSchema, RejectsDuplicateNames) {
  EXPECT_THROW(FeatureSchema({{"a", FeatureKind::numeric}, {"a", FeatureKind::numeric}}, "y"), DataError);
}

TEST(FeatureSchema, JsonRoundTrip) {
  const FeatureSchema s({{"a", FeatureKind::numeric}, {"b", FeatureKind::categorical}}, "y");
  const nlohmann::json j = s;
  EXPECT_EQ(j.at("features").at(1).at("kind"), "categorical");
  EXPECT_EQ(j.get<FeatureSchema>(), s);
}

Dataset numeric_column(const std::vector<double>& values) {
  std::vector<Instance> rows;
  std::vector<int> labels;
  for (double v : values) {
    rows.push_back({v});
    labels.push_back(0);
  }
  return Dataset(FeatureSchema({{"x", FeatureKind::numeric}}, "y"), rows, labels);
}

TEST(Discretizer, MedianSplit) {
  const auto s = fit_discretizer(numeric_column({1, 2, 3, 4}), 2);
  ASSERT_EQ(s.feature(0).cuts.size(), 1u);
  EXPECT_DOUBLE_EQ(s.feature(0).cuts[0], 2.5);
  EXPECT_EQ(s.feature(0).bin_count(), 2u);
}

TEST(Discretizer, ConstantFeatureHasOneBin) {
  const auto s = fit_discretizer(numeric_column({5, 5, 5, 5}), 3);
  EXPECT_TRUE(s.feature(0).cuts.empty());
  EXPECT_EQ(s.feature(0).bin_count(), 1u);
  const auto iv = itemize({5.0}, s);
  EXPECT_EQ(iv.items, (std::vector<ItemId>{0}));
  EXPECT_FALSE(iv.out_of_range[0]);
}

TEST(Discretizer, RejectsFewerThanTwoBins) {
  EXPECT_THROW(fit_discretizer(numeric_column({1, 2}), 1), ContractError);
}

TEST(Discretizer, EdgeValueGoesToRightInterval) {
  const auto s = fit_discretizer(numeric_column({1, 2, 3, 4}), 2);
  const Instance at_edge{2.5};
  EXPECT_EQ(s.item_bin(itemize(at_edge, s).items[0]), 1u);
  const Instance top{4.0};
  EXPECT_EQ(s.item_bin(itemize(top, s).items[0]), 1u);
  EXPECT_TRUE(s.feature(0).interval(1).upper_closed);
  EXPECT_FALSE(s.feature(0).interval(0).upper_closed);
}

TEST(Discretizer, OutOfRangeClampsAndFlags) {
  const auto s = fit_discretizer(numeric_column({1, 2, 3, 4}), 2);
  const auto lo = itemize({-3.0}, s);
  const auto hi = itemize({9.0}, s);
  EXPECT_EQ(s.item_bin(lo.items[0]), 0u);
  EXPECT_EQ(s.item_bin(hi.items[0]), 1u);
  EXPECT_TRUE(lo.out_of_range[0]);
  EXPECT_TRUE(hi.out_of_range[0]);
}

TEST(Discretizer, CategoricalPassThroughAndUnseen) {
  Dataset ds(FeatureSchema({{"c", FeatureKind::categorical}}, "y"), {{std::string("b")}, {std::string("a")}}, {0, 1});
  const auto s = fit_discretizer(ds, 3);
  EXPECT_EQ(s.feature(0).categories, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.item_bin(itemize({std::string("b")}, s).items[0]), 1u);
  EXPECT_THROW(itemize({std::string("zzz")}, s), DataError);
}

TEST(Discretizer, WisconsinIntervalsOfTheWorkedInstance) {
  const auto r = load_dataset(testing::data_dir() / "wisconsin_original.csv");
  const auto s = fit_discretizer(r.dataset, 3);
  const auto& thick = s.feature(0);
  const auto iv = itemize(testing::worked_instance(r.dataset.schema()), s);
  const auto interval = thick.interval(s.item_bin(iv.items[0]));
  EXPECT_DOUBLE_EQ(interval.lower, 3.0);
  EXPECT_DOUBLE_EQ(interval.upper, 5.0);
  const auto bare = s.feature(5).interval(s.item_bin(iv.items[5]));
  EXPECT_DOUBLE_EQ(bare.lower, 1.0);
  EXPECT_DOUBLE_EQ(bare.upper, 3.0);
  const auto nuc = s.feature(7).interval(s.item_bin(iv.items[7]));
  EXPECT_DOUBLE_EQ(nuc.lower, 1.0);
  EXPECT_DOUBLE_EQ(nuc.upper, 2.0);
}

TEST(Discretizer, JsonRoundTripIsExact) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0, 1);
  std::vector<double> v(57);
  for (auto& x : v) x = g(rng);
  const auto s = fit_discretizer(numeric_column(v), 4);
  const nlohmann::json j = s;
  const auto back = nlohmann::json::parse(j.dump()).get<DiscretizationSchema>();
  EXPECT_EQ(back, s);
}

TEST(DiscretizerProperty, RoundTripContainsRawValue) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ds = testing::random_numeric_dataset(rng, 30, 4, 1 + trial % 7);
    const auto s = fit_discretizer(ds, 2 + trial % 4);
    for (const auto& row : ds.rows()) {
      const auto iv = itemize(row, s);
      ASSERT_EQ(iv.items.size(), ds.d());
      for (std::size_t j = 0; j < ds.d(); ++j) {
        EXPECT_EQ(s.item_feature(iv.items[j]), j);
        EXPECT_FALSE(iv.out_of_range[j]);
        EXPECT_TRUE(s.feature(j).interval(s.item_bin(iv.items[j])).contains(std::get<double>(row[j])));
      }
    }
  }
}

TEST(DiscretizerProperty, Deterministic) {
  std::mt19937_64 rng(3);
  const auto ds = testing::random_numeric_dataset(rng, 40, 3, 9);
  EXPECT_EQ(fit_discretizer(ds, 3), fit_discretizer(ds, 3));
}

TEST(DiscretizerProperty, DistinctValuesGiveBalancedBins) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + rng() % 90;
    const std::size_t q = 2 + rng() % 6;
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    const auto s = fit_discretizer(numeric_column(v), q);
    ASSERT_EQ(s.feature(0).bin_count(), q);
    std::vector<std::size_t> counts(q, 0);
    for (double x : v) ++counts[s.item_bin(itemize({x}, s).items[0])];
    const double expected = static_cast<double>(n) / static_cast<double>(q);
    for (std::size_t b = 0; b < q; ++b) EXPECT_LE(std::abs(static_cast<double>(counts[b]) - expected), 1.0);
  }
}

TEST(Instance, JsonRoundTripAndUnknownKeys) {
  const FeatureSchema s({{"a", FeatureKind::numeric}, {"b", FeatureKind::categorical}}, "y");
  const auto inst = instance_from_json({{"a", 1.5}, {"b", "x"}}, s);
  EXPECT_EQ(instance_to_json(inst, s), (nlohmann::json{{"a", 1.5}, {"b", "x"}}));
  EXPECT_THROW(instance_from_json({{"a", 1.5}}, s), DataError);
  EXPECT_THROW(instance_from_json({{"a", 1.5}, {"b", "x"}, {"c", 2}}, s), DataError);
  EXPECT_NO_THROW(instance_from_json({{"a", 1.5}, {"b", "x"}, {"y", 1}}, s));
}

}  // namespace
}  // namespace rulepref::data
