#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "rulepref/session.hpp"
#include "test_support.hpp"

namespace rulepref::tools {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rulepref");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("rulepref_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string worked(const std::string& name) { return (testing::worked_dir() / name).string(); }
  static std::string wisconsin() { return (testing::data_dir() / "wisconsin_original.csv").string(); }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"explain", "--rules", "r.json"}).code, kExitUsage);
  EXPECT_EQ(run({"explain", "--instance", "x", "--rules", "r", "--model", "m", "--strategy", "greedy"}).code,
            kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(run({"explain", "--instance", path("absent.json"), "--rules", worked("rules.json"), "--model",
                 worked("model.json")})
                .code,
            kExitData);
  std::ofstream(path("bad.csv")) << "a,y\n1,p\n2,q\n3,r\n";
  const auto r = run({"train", "--data", path("bad.csv"), "--out", path("m.json"), "--folds", "0"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("non-binary label"), std::string::npos);
}

TEST_F(CliTest, ExplainWorkedFixture) {
  const auto r = run({"explain", "--instance", worked("instance.json"), "--rules", worked("rules.json"), "--model",
                      worked("model.json"), "--ranking", worked("reference.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("n_covering"), 15);
  const auto& ranking = j.at("results").at("max-eps").at("ranking");
  std::vector<prefmodel::RuleId> ids;
  for (const auto& e : ranking) ids.push_back(e.at("id"));
  EXPECT_EQ(ids, testing::fitted_order());
  EXPECT_EQ(j.at("results").at("max-eps").at("discovery").at("above_best_reference"), 1);
}

TEST_F(CliTest, ExplainWithoutRankingListsCoveringRules) {
  const auto r = run({"explain", "--instance", worked("instance.json"), "--rules", worked("rules.json"), "--model",
                      worked("model.json"), "--out", path("x.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(testing::read_json(path("x.json")).at("rules").size(), 15u);
}

TEST_F(CliTest, ApiParity) {
  std::ofstream(path("ref.json")) << R"({"ranking": [3, 6, 9, 7], "strategies": ["max-eps", "hr-centroid"],
                                        "sampler": {"n": 300, "burn_in": 20, "seed": 4}})";
  const auto r = run({"explain", "--instance", worked("instance.json"), "--rules", worked("rules.json"), "--model",
                      worked("model.json"), "--ranking", path("ref.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto cli = nlohmann::json::parse(r.out);

  const auto rules = testing::worked_rules();
  const auto model = blackbox::model_from_json(testing::read_json(worked("model.json")));
  interface::SessionStore store;
  interface::ExplanationService svc(rules, *model, store);
  const auto id = svc.create_session(testing::read_json(worked("instance.json"))).at("session_id").get<std::string>();
  const auto api = svc.submit_ranking(id, testing::read_json(path("ref.json")));
  EXPECT_EQ(cli.at("results"), api.at("results"));
}

TEST_F(CliTest, TrainMineSimulateReport) {
  auto r = run({"train", "--data", wisconsin(), "--epochs", "15", "--batch-size", "64", "--lr", "0.003", "--folds",
                "3", "--out", path("model.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GT(nlohmann::json::parse(r.out).at("cv").at("accuracy").at("mean").get<double>(), 0.85);

  r = run({"mine", "--data", wisconsin(), "--model", path("model.json"), "--min-support", "3", "--out",
           path("rules.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_GT(nlohmann::json::parse(r.out).at("rules").get<std::size_t>(), 100u);

  std::ofstream(path("exp.json")) << nlohmann::json{{"data", wisconsin()},
                                                     {"model", "model.json"},
                                                     {"rules", "rules.json"},
                                                     {"k", 4},
                                                     {"instances_per_class", 2},
                                                     {"trials", 1},
                                                     {"sampler", {{"n", 200}, {"burn_in", 20}}}}
                                          .dump();
  r = run({"simulate", "--config", path("exp.json"), "--out", path("results"), "--threads", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(path("results/trials.csv")));
  EXPECT_TRUE(fs::exists(path("results/summary.csv")));
  EXPECT_TRUE(fs::exists(path("results/aggregate.json")));

  r = run({"report", "--results", path("results/trials.csv"), "--summary-csv", path("s.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(nlohmann::json::parse(r.out).contains("groups"));
  EXPECT_TRUE(fs::exists(path("s.csv")));
}

}  // namespace
}  // namespace rulepref::tools
