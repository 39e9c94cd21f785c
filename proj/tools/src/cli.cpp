#include "cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "http_service.hpp"
#include "rulepref/blackbox.hpp"
#include "rulepref/error.hpp"
#include "rulepref/experiment.hpp"
#include "rulepref/rulegen.hpp"
#include "rulepref/session.hpp"
#include "rulepref/simulation.hpp"

namespace rulepref::tools {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw DataError("cannot write " + path.string());
}

void emit(std::ostream& out, const std::string& path, const nlohmann::json& j) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << '\n';
  } else {
    write_text(path, j.dump(2) + "\n");
  }
}

struct DataFlags {
  std::string data;
  std::string schema;
  std::string label;
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool required) {
  auto* opt = cmd->add_option("--data", f.data, "CSV dataset with a header row");
  if (required) opt->required();
  cmd->add_option("--schema", f.schema, "JSON schema override");
  cmd->add_option("--label", f.label, "label column name");
}

data::LoadReport load_data(const DataFlags& f, std::optional<data::FeatureSchema> schema, std::ostream& err) {
  data::LoadOptions opts;
  if (!f.schema.empty()) schema = read_json(f.schema).get<data::FeatureSchema>();
  opts.schema = std::move(schema);
  if (!f.label.empty()) opts.label_column = f.label;
  auto report = data::load_dataset(fs::path(f.data), opts);
  if (report.dropped_missing > 0) {
    err << "warning: dropped " << report.dropped_missing << " rows with missing cells\n";
  }
  return report;
}

struct HparamFlags {
  std::string file;
  std::optional<double> lr, threshold, weight_decay;
  std::optional<std::size_t> batch, epochs, hidden, embedding;
  std::vector<double> class_weights;
  std::optional<std::uint64_t> seed;
};

void add_hparam_flags(CLI::App* cmd, HparamFlags& f) {
  cmd->add_option("--hparams", f.file, "MLP hyperparameter JSON");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--batch-size", f.batch, "minibatch size");
  cmd->add_option("--epochs", f.epochs, "training epochs");
  cmd->add_option("--threshold", f.threshold, "decision threshold");
  cmd->add_option("--weight-decay", f.weight_decay, "decoupled weight decay");
  cmd->add_option("--hidden-width", f.hidden, "hidden layer width");
  cmd->add_option("--embedding-dim", f.embedding, "categorical embedding size");
  cmd->add_option("--class-weights", f.class_weights, "weights for class 0 and class 1")->expected(2);
  cmd->add_option("--train-seed", f.seed, "training seed");
}

blackbox::MlpHyperparams resolve_hparams(const HparamFlags& f, const nlohmann::json* base = nullptr) {
  blackbox::MlpHyperparams hp;
  if (base) hp = base->get<blackbox::MlpHyperparams>();
  if (!f.file.empty()) hp = read_json(f.file).get<blackbox::MlpHyperparams>();
  if (f.lr) hp.learning_rate = *f.lr;
  if (f.batch) hp.batch_size = *f.batch;
  if (f.epochs) hp.epochs = *f.epochs;
  if (f.threshold) hp.decision_threshold = *f.threshold;
  if (f.weight_decay) hp.weight_decay = *f.weight_decay;
  if (f.hidden) hp.hidden_width = *f.hidden;
  if (f.embedding) hp.embedding_dim = *f.embedding;
  if (f.class_weights.size() == 2) {
    hp.class_weight_negative = f.class_weights[0];
    hp.class_weight_positive = f.class_weights[1];
  }
  if (f.seed) hp.seed = *f.seed;
  hp.validate();
  return hp;
}

struct InductionFlags {
  std::string file;
  std::optional<std::size_t> min_support, bins, max_length;
  std::optional<double> min_confirmation, min_confidence;
};

void add_induction_flags(CLI::App* cmd, InductionFlags& f) {
  cmd->add_option("--params", f.file, "induction parameter JSON");
  cmd->add_option("--min-support", f.min_support, "minimum support as an instance count");
  cmd->add_option("--min-confirmation", f.min_confirmation, "minimum confirmation");
  cmd->add_option("--min-confidence", f.min_confidence, "minimum confidence");
  cmd->add_option("--bins", f.bins, "quantile bins per numeric feature");
  cmd->add_option("--max-length", f.max_length, "longest antecedent (0: d)");
}

rulegen::InductionParams resolve_induction(const InductionFlags& f, const nlohmann::json* base = nullptr) {
  rulegen::InductionParams p;
  if (base) p = base->get<rulegen::InductionParams>();
  if (!f.file.empty()) p = read_json(f.file).get<rulegen::InductionParams>();
  if (f.min_support) p.min_support_count = *f.min_support;
  if (f.min_confirmation) p.min_confirmation = *f.min_confirmation;
  if (f.min_confidence) p.min_confidence = *f.min_confidence;
  if (f.bins) p.num_bins = *f.bins;
  if (f.max_length) p.max_length = *f.max_length;
  p.validate();
  return p;
}

nlohmann::json cv_json(const evalsuite::CvSummary& cv) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : cv.folds) folds.push_back({{"accuracy", f.accuracy}, {"balanced_accuracy", f.balanced_accuracy}});
  return {{"folds", folds},
          {"accuracy", {{"mean", cv.accuracy_mean}, {"std", cv.accuracy_std}}},
          {"balanced_accuracy", {{"mean", cv.balanced_mean}, {"std", cv.balanced_std}}}};
}

nlohmann::json coverage_json(const rulegen::CoverageStatistics& stats) {
  nlohmann::json j = nlohmann::json::object();
  for (int c = 0; c < 2; ++c) {
    const auto& cc = stats.by_class[c];
    j[std::to_string(c)] = {{"instances", cc.counts.size()}, {"mean", cc.mean}, {"median", cc.median},
                            {"min", cc.min},                  {"max", cc.max}};
  }
  return j;
}

struct SamplerFlags {
  std::optional<std::size_t> samples, burn_in, thinning;
  std::optional<std::uint64_t> seed;
};

void add_sampler_flags(CLI::App* cmd, SamplerFlags& f) {
  cmd->add_option("--samples", f.samples, "hit-and-run samples kept");
  cmd->add_option("--burn-in", f.burn_in, "hit-and-run steps discarded");
  cmd->add_option("--thinning", f.thinning, "steps per kept sample");
  cmd->add_option("--seed", f.seed, "sampler seed");
}

void apply_sampler(const SamplerFlags& f, prefmodel::SamplerOptions& o) {
  if (f.samples) o.samples = *f.samples;
  if (f.burn_in) o.burn_in = *f.burn_in;
  if (f.thinning) o.thinning = *f.thinning;
  if (f.seed) o.seed = *f.seed;
  o.validate();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::atomic<HttpService*> g_service{nullptr};

extern "C" void handle_signal(int) {
  if (auto* s = g_service.load()) s->stop();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Personalized rule-based explanations of a black-box classifier"};
  app.name("rulepref");
  app.require_subcommand(1);

  // train
  DataFlags train_data;
  HparamFlags train_hp;
  std::string train_out;
  std::size_t train_folds = 10;
  std::uint64_t train_cv_seed = 0;
  auto* train = app.add_subcommand("train", "train the MLP black box");
  add_data_flags(train, train_data, true);
  add_hparam_flags(train, train_hp);
  train->add_option("--out", train_out, "model JSON output")->required();
  train->add_option("--folds", train_folds, "cross-validation folds (0 disables)");
  train->add_option("--cv-seed", train_cv_seed, "fold assignment seed");

  // mine
  DataFlags mine_data;
  InductionFlags mine_params;
  std::string mine_model, mine_out;
  auto* mine = app.add_subcommand("mine", "mine the exact-fidelity rule set");
  add_data_flags(mine, mine_data, true);
  add_induction_flags(mine, mine_params);
  mine->add_option("--model", mine_model, "model JSON")->required();
  mine->add_option("--out", mine_out, "rule set JSON output")->required();

  // explain
  std::string ex_instance, ex_rules, ex_model, ex_ranking, ex_out;
  std::vector<std::string> ex_strategies;
  SamplerFlags ex_sampler;
  auto* explain = app.add_subcommand("explain", "rank the covering rules of one instance");
  explain->add_option("--instance", ex_instance, "instance JSON {feature: value}")->required();
  explain->add_option("--rules", ex_rules, "rule set JSON")->required();
  explain->add_option("--model", ex_model, "model JSON")->required();
  explain->add_option("--ranking", ex_ranking, "reference ranking JSON {\"ranking\": [ids], ...}");
  explain->add_option("--strategy", ex_strategies, "max-eps, hr-centroid or hr-first-rules (repeatable)")
      ->check(CLI::IsMember({"max-eps", "hr-centroid", "hr-first-rules"}));
  explain->add_option("--out", ex_out, "output JSON (default stdout)");
  add_sampler_flags(explain, ex_sampler);

  // simulate
  std::string sim_config, sim_out;
  std::optional<std::size_t> sim_k, sim_instances, sim_trials, sim_threads;
  std::optional<std::uint64_t> sim_seed;
  std::vector<std::size_t> sim_sweep;
  auto* simulate = app.add_subcommand("simulate", "run the simulated-user experiment");
  simulate->add_option("--config", sim_config, "experiment config JSON")->required();
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--k", sim_k, "reference length");
  simulate->add_option("--instances-per-class", sim_instances, "instances sampled per class");
  simulate->add_option("--trials", sim_trials, "trials per instance");
  simulate->add_option("--seed", sim_seed, "master seed");
  simulate->add_option("--k-sweep", sim_sweep, "reference lengths to sweep");
  simulate->add_option("--threads", sim_threads, "worker threads (0: all cores)");

  // serve
  std::string sv_rules, sv_model, sv_store, sv_host = "127.0.0.1";
  int sv_port = 8080;
  auto* serve = app.add_subcommand("serve", "serve the HTTP session API");
  serve->add_option("--rules", sv_rules, "rule set JSON")->required();
  serve->add_option("--model", sv_model, "model JSON")->required();
  serve->add_option("--store", sv_store, "session directory (default: in memory)");
  serve->add_option("--host", sv_host, "bind address (env RULEPREF_HOST overrides)");
  serve->add_option("--port", sv_port, "bind port (env RULEPREF_PORT overrides)");

  // report
  std::string rp_results, rp_out, rp_csv;
  auto* report = app.add_subcommand("report", "aggregate a trial table");
  report->add_option("--results", rp_results, "trial CSV")->required();
  report->add_option("--out", rp_out, "aggregate JSON (default stdout)");
  report->add_option("--summary-csv", rp_csv, "per-group summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      const auto hp = resolve_hparams(train_hp);
      const auto loaded = load_data(train_data, std::nullopt, err);
      const auto trained = blackbox::train_mlp(loaded.dataset, hp);
      nlohmann::json model = trained.model;
      write_text(train_out, model.dump() + "\n");
      nlohmann::json summary = {{"model", train_out},
                                {"rows", loaded.dataset.n()},
                                {"dropped_missing", loaded.dropped_missing},
                                {"final_loss", trained.report.epoch_loss.empty() ? 0.0 : trained.report.epoch_loss.back()},
                                {"hparams", hp}};
      if (train_folds > 0) {
        summary["cv"] = cv_json(evalsuite::cross_validate_mlp(loaded.dataset, hp, train_folds, train_cv_seed));
      }
      out << summary.dump(2) << '\n';
    } else if (mine->parsed()) {
      const auto model = blackbox::model_from_json(read_json(mine_model));
      const auto params = resolve_induction(mine_params);
      const auto loaded = load_data(mine_data, model->schema(), err);
      const auto relabeled = blackbox::relabel(loaded.dataset, *model);
      const auto rules = rulegen::mine_rules(relabeled, params);
      nlohmann::json rj = rules;
      write_text(mine_out, rj.dump(1) + "\n");
      out << nlohmann::json{{"rules", rules.size()},
                            {"rows", relabeled.n()},
                            {"coverage", coverage_json(rulegen::coverage_statistics(rules, relabeled, *model))}}
                 .dump(2)
          << '\n';
    } else if (explain->parsed()) {
      const auto rules = rulegen::rule_set_from_json(read_json(ex_rules));
      const auto model = blackbox::model_from_json(read_json(ex_model));
      if (!(rules.schema() == model->schema())) throw DataError("rule set and model schemas differ");
      const auto instance = data::instance_from_json(read_json(ex_instance), rules.schema());
      const auto pred = model->predict(instance);
      const auto rx = rulegen::covering_rules(rules, instance, pred.label);
      nlohmann::json result = {{"predicted_label", pred.label},
                               {"probability", pred.probability},
                               {"n_covering", rx.size()}};
      if (ex_ranking.empty()) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& r : rx) list.push_back(r);
        result["rules"] = std::move(list);
      } else {
        const auto body = read_json(ex_ranking);
        auto request = interface::ranking_request_from_json(body);
        if (!ex_strategies.empty()) {
          request.strategies.clear();
          for (const auto& s : ex_strategies) request.strategies.push_back(prefmodel::strategy_from_string(s));
        }
        apply_sampler(ex_sampler, request.sampler);
        result.update(interface::fit_explanation(rules, rx, request));
      }
      emit(out, ex_out, result);
    } else if (simulate->parsed()) {
      const fs::path config_path(sim_config);
      const auto cj = read_json(config_path);
      const fs::path base = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
      auto config = cj.get<evalsuite::ExperimentConfig>();
      if (sim_k) config.k = *sim_k;
      if (sim_instances) config.instances_per_class = *sim_instances;
      if (sim_trials) config.trials = *sim_trials;
      if (sim_seed) config.seed = *sim_seed;
      if (!sim_sweep.empty()) config.k_sweep = sim_sweep;
      if (sim_threads) config.threads = *sim_threads;
      config.validate();
      if (!cj.contains("data")) throw DataError("experiment config needs \"data\"");
      DataFlags df;
      df.data = resolve(base, cj.at("data").get<std::string>()).string();
      if (cj.contains("label")) df.label = cj.at("label").get<std::string>();

      std::unique_ptr<blackbox::LabelProvider> model;
      std::optional<data::FeatureSchema> schema;
      if (cj.contains("model")) {
        model = blackbox::model_from_json(read_json(resolve(base, cj.at("model").get<std::string>())));
        schema = model->schema();
      }
      const auto loaded = load_data(df, schema, err);
      if (!model) {
        HparamFlags none;
        const nlohmann::json hp_json = cj.value("hparams", nlohmann::json::object());
        model = std::make_unique<blackbox::MlpModel>(
            blackbox::train_mlp(loaded.dataset, resolve_hparams(none, &hp_json)).model);
      }
      const auto relabeled = blackbox::relabel(loaded.dataset, *model);
      std::optional<rulegen::RuleSet> rules;
      if (cj.contains("rules")) {
        rules = rulegen::rule_set_from_json(read_json(resolve(base, cj.at("rules").get<std::string>())));
      } else {
        InductionFlags none;
        const nlohmann::json ind_json = cj.value("induction", nlohmann::json::object());
        rules = rulegen::mine_rules(relabeled, resolve_induction(none, &ind_json));
      }
      const auto result = evalsuite::run_experiment(config, {relabeled, *model, *rules});
      const fs::path dir(sim_out);
      fs::create_directories(dir);
      std::ostringstream trials_csv, summary_csv;
      evalsuite::write_trials_csv(trials_csv, result.trials);
      evalsuite::write_summary_csv(summary_csv, result.trials);
      write_text(dir / "trials.csv", trials_csv.str());
      write_text(dir / "summary.csv", summary_csv.str());
      auto agg = evalsuite::aggregate(result.trials);
      agg["config"] = config;
      agg["rules"] = rules->size();
      agg["eligible"] = {result.eligible[0], result.eligible[1]};
      agg["sampled"] = {result.sampled[0], result.sampled[1]};
      agg["excluded"] = {{"infeasible", result.excluded.infeasible},
                         {"unavailable", result.excluded.unavailable},
                         {"inconsistent", result.excluded.inconsistent}};
      write_text(dir / "aggregate.json", agg.dump(2) + "\n");
      out << nlohmann::json{{"trials", result.trials.size()},
                            {"out", dir.string()},
                            {"excluded", agg["excluded"]},
                            {"sampled", agg["sampled"]}}
                 .dump(2)
          << '\n';
    } else if (serve->parsed()) {
      if (const char* h = std::getenv("RULEPREF_HOST"); h && *h) sv_host = h;
      if (const char* p = std::getenv("RULEPREF_PORT"); p && *p) {
        try {
          sv_port = std::stoi(p);
        } catch (const std::exception&) {
          err << "error: RULEPREF_PORT must be an integer\n";
          return kExitUsage;
        }
      }
      const auto rules = rulegen::rule_set_from_json(read_json(sv_rules));
      const auto model = blackbox::model_from_json(read_json(sv_model));
      interface::SessionStore store(sv_store);
      interface::ExplanationService service(rules, *model, store);
      HttpService http(service);
      g_service = &http;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      err << "listening on " << sv_host << ":" << sv_port << "\n";
      const bool ok = http.listen(sv_host, sv_port);
      g_service = nullptr;
      if (!ok) {
        err << "error: cannot bind " << sv_host << ":" << sv_port << "\n";
        return kExitData;
      }
    } else if (report->parsed()) {
      std::ifstream in(rp_results);
      if (!in) throw DataError("cannot open " + rp_results);
      const auto trials = evalsuite::read_trials_csv(in);
      emit(out, rp_out, evalsuite::aggregate(trials));
      if (!rp_csv.empty()) {
        std::ostringstream csv;
        evalsuite::write_summary_csv(csv, trials);
        write_text(rp_csv, csv.str());
      }
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace rulepref::tools
