#include "rulepref/session.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "rulepref/error.hpp"
#include "rulepref/metrics.hpp"
#include "rulepref/random.hpp"

namespace rulepref::interface {

using prefmodel::RuleId;
using prefmodel::Strategy;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

RankingRequest ranking_request_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("ranking body must be a JSON object");
  RankingRequest r;
  try {
    if (!j.contains("ranking") || !j.at("ranking").is_array()) throw DataError("'ranking' must be an array of rule ids");
    r.ranking = j.at("ranking").get<std::vector<RuleId>>();
    if (j.contains("strategies")) {
      r.strategies.clear();
      for (const auto& s : j.at("strategies")) r.strategies.push_back(prefmodel::strategy_from_string(s.get<std::string>()));
      if (r.strategies.empty()) throw DataError("'strategies' must not be empty");
    }
    if (j.contains("sampler")) r.sampler = j.at("sampler").get<prefmodel::SamplerOptions>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed ranking body: ") + e.what());
  } catch (const ContractError& e) {
    throw DataError(std::string("malformed ranking body: ") + e.what());
  }
  return r;
}

nlohmann::json ranking_request_to_json(const RankingRequest& r) {
  std::vector<std::string> names;
  for (Strategy s : r.strategies) names.emplace_back(prefmodel::to_string(s));
  return {{"ranking", r.ranking}, {"strategies", names}, {"sampler", r.sampler}};
}

namespace {

nlohmann::json rule_entry(const rulegen::Rule& rule) {
  nlohmann::json j = rule;
  std::vector<std::string> text;
  for (const auto& c : rule.antecedent) text.push_back(c.to_text());
  j["text"] = text;
  return j;
}

}  // namespace

nlohmann::json fit_explanation(const rulegen::RuleSet& rules, const std::vector<rulegen::Rule>& rx,
                               const RankingRequest& request) {
  std::unordered_set<RuleId> covering;
  for (const auto& r : rx) covering.insert(r.id);
  for (RuleId id : request.ranking) {
    if (!covering.count(id)) throw ContractError("rule " + std::to_string(id) + " does not cover the instance");
  }
  const prefmodel::ReferenceRanking reference(request.ranking);
  const auto features = prefmodel::feature_map(rx, rules.schema().size());
  prefmodel::FitOptions options;
  options.strategies = request.strategies;
  options.sampler = request.sampler;
  const auto fit = prefmodel::personalize(features, reference, options);

  const std::vector<std::uint32_t> ref_ids(request.ranking.begin(), request.ranking.end());
  nlohmann::json results = nlohmann::json::object();
  for (const auto& sr : fit.results) {
    nlohmann::json out = {{"available", sr.available}};
    if (!sr.available) {
      out["reason"] = sr.unavailable_reason;
      results[std::string(prefmodel::to_string(sr.strategy))] = std::move(out);
      continue;
    }
    if (sr.weights) out["weights"] = prefmodel::weights_to_json(*sr.weights, rules.schema());
    if (sr.epsilon) out["epsilon"] = *sr.epsilon;
    if (sr.strategy == Strategy::max_eps) out["weak"] = sr.weak;
    if (sr.strategy == Strategy::hr_first_rules) {
      nlohmann::json set = nlohmann::json::array();
      for (RuleId id : sr.first_rules) {
        auto e = rule_entry(rules.rule(id));
        e["in_reference"] = reference.contains(id);
        e["discovered"] = !reference.contains(id);
        set.push_back(std::move(e));
      }
      out["first_rules"] = std::move(set);
    } else {
      nlohmann::json ranking = nlohmann::json::array();
      std::vector<std::uint32_t> order;
      for (std::size_t pos = 0; pos < sr.ranking.size(); ++pos) {
        const auto& s = sr.ranking[pos];
        auto e = rule_entry(rules.rule(s.id));
        e["rank"] = pos + 1;
        e["score"] = s.score;
        e["in_reference"] = reference.contains(s.id);
        e["discovered"] = !reference.contains(s.id);
        ranking.push_back(std::move(e));
        order.push_back(s.id);
      }
      const auto dc = evalsuite::discovery_counts(order, ref_ids);
      out["ranking"] = std::move(ranking);
      out["discovery"] = {{"above_best_reference", dc.above_best_ref}, {"new_in_top5", dc.new_in_top5}};
    }
    results[std::string(prefmodel::to_string(sr.strategy))] = std::move(out);
  }
  nlohmann::json response = {{"reference", request.ranking},
                             {"request", ranking_request_to_json(request)},
                             {"max_margin_status", prefmodel::to_string(fit.max_margin.status)},
                             {"results", results}};
  nlohmann::json warnings = nlohmann::json::array();
  if (request.ranking.size() > kRankingWarnAbove) {
    warnings.push_back("reference length " + std::to_string(request.ranking.size()) + " is outside the advised 2.." +
                       std::to_string(kRankingWarnAbove));
  }
  response["warnings"] = warnings;
  return response;
}

bool ExplanationSession::operator==(const ExplanationSession& other) const {
  return session_to_json(*this) == session_to_json(other);
}

nlohmann::json session_to_json(const ExplanationSession& s) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : s.history) {
    history.push_back({{"request", ranking_request_to_json(h.request)}, {"timestamp", h.timestamp}, {"response", h.response}});
  }
  return {{"id", s.id},
          {"created", s.created},
          {"instance", s.instance},
          {"predicted_label", s.predicted_label},
          {"probability", s.probability},
          {"covering", s.covering},
          {"ruleset_hash", s.ruleset_hash},
          {"history", history}};
}

ExplanationSession session_from_json(const nlohmann::json& j) {
  try {
    ExplanationSession s;
    s.id = j.at("id").get<std::string>();
    s.created = j.at("created").get<std::string>();
    s.instance = j.at("instance");
    s.predicted_label = j.at("predicted_label").get<int>();
    s.probability = j.at("probability").get<double>();
    s.covering = j.at("covering").get<std::vector<RuleId>>();
    s.ruleset_hash = j.at("ruleset_hash").get<std::string>();
    for (const auto& h : j.at("history")) {
      HistoryEntry e;
      e.request = ranking_request_from_json(h.at("request"));
      e.timestamp = h.at("timestamp").get<std::string>();
      e.response = h.at("response");
      s.history.push_back(std::move(e));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid session JSON: ") + e.what());
  }
}

void save_session(const std::filesystem::path& file, const ExplanationSession& s) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw DataError("cannot write session file " + tmp.string());
    out << session_to_json(s).dump(2) << '\n';
    if (!out.flush()) throw DataError("cannot write session file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) throw DataError("cannot replace session file " + file.string() + ": " + ec.message());
}

ExplanationSession load_session(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw NotFoundError("session file not found: " + file.string());
  try {
    return session_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt session file " + file.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("corrupt session file " + file.string() + ": " + e.what());
  }
}

SessionStore::SessionStore(std::filesystem::path directory) : directory_(std::move(directory)) {
  if (!directory_.empty()) std::filesystem::create_directories(directory_);
}

std::filesystem::path SessionStore::file_of(const std::string& id) const { return directory_ / (id + ".json"); }

void SessionStore::persist(const ExplanationSession& s) const {
  if (!directory_.empty()) save_session(file_of(s.id), s);
}

std::string SessionStore::insert(ExplanationSession session) {
  std::lock_guard lock(map_mutex_);
  if (session.id.empty()) {
    static thread_local Rng rng(std::random_device{}());
    for (;;) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "s%015llx", static_cast<unsigned long long>(derive_seed(rng(), {++counter_}) >> 4));
      std::string id(buf);
      if (!sessions_.count(id) && (directory_.empty() || !std::filesystem::exists(file_of(id)))) {
        session.id = id;
        break;
      }
    }
  }
  for (char c : session.id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') throw ContractError("invalid session id");
  }
  persist(session);
  auto entry = std::make_shared<Entry>();
  entry->session = std::move(session);
  const std::string id = entry->session.id;
  sessions_[id] = std::move(entry);
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) {
  std::lock_guard lock(map_mutex_);
  if (const auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  const bool safe = !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
  if (!safe || directory_.empty()) throw NotFoundError("unknown session '" + id + "'");
  auto entry = std::make_shared<Entry>();
  entry->session = load_session(file_of(id));
  if (entry->session.id != id) throw DataError("session file " + file_of(id).string() + " holds a different id");
  sessions_[id] = entry;
  return entry;
}

ExplanationSession SessionStore::get(const std::string& id) {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

ExplanationService::ExplanationService(const rulegen::RuleSet& rules, const blackbox::LabelProvider& model,
                                       SessionStore& store)
    : rules_(rules), model_(model), store_(store) {
  if (!(rules.schema() == model.schema())) throw ContractError("rule set and model schemas differ");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016llx-%zu", static_cast<unsigned long long>(rules.provenance().dataset_hash),
                rules.size());
  ruleset_hash_ = buf;
}

nlohmann::json ExplanationService::create_session(const nlohmann::json& body) {
  const nlohmann::json& payload = body.is_object() && body.contains("instance") ? body.at("instance") : body;
  if (!payload.is_object()) throw DataError("instance must be a JSON object of feature values");
  const auto instance = data::instance_from_json(payload, rules_.schema());
  const auto pred = model_.predict(instance);
  const auto rx = rulegen::covering_rules(rules_, instance, pred.label);
  ExplanationSession s;
  s.created = utc_timestamp();
  s.instance = data::instance_to_json(instance, rules_.schema());
  s.predicted_label = pred.label;
  s.probability = pred.probability;
  for (const auto& r : rx) s.covering.push_back(r.id);
  s.ruleset_hash = ruleset_hash_;
  const std::size_t n = s.covering.size();
  const std::string id = store_.insert(std::move(s));
  nlohmann::json out = {{"session_id", id}, {"predicted_label", pred.label}, {"probability", pred.probability},
                        {"n_covering", n}};
  if (n == 0) out["message"] = "no covering rules";
  return out;
}

nlohmann::json ExplanationService::rules(const std::string& id, std::size_t offset, std::optional<std::size_t> limit) {
  const auto s = store_.get(id);
  const std::size_t total = s.covering.size();
  const std::size_t begin = std::min(offset, total);
  const std::size_t end = limit ? std::min(total, begin + *limit) : total;
  nlohmann::json items = nlohmann::json::array();
  for (std::size_t i = begin; i < end; ++i) items.push_back(rule_entry(rules_.rule(s.covering[i])));
  return {{"session_id", id}, {"total", total}, {"offset", begin}, {"limit", end - begin}, {"rules", items}};
}

nlohmann::json ExplanationService::fit_and_record(const std::string& id, const RankingRequest& request) {
  return store_.update(id, [&](ExplanationSession& s) {
    if (s.ruleset_hash != ruleset_hash_) throw ContractError("session was created against a different rule set");
    std::vector<rulegen::Rule> rx;
    for (RuleId rid : s.covering) rx.push_back(rules_.rule(rid));
    auto response = fit_explanation(rules_, rx, request);
    HistoryEntry entry;
    entry.request = request;
    entry.timestamp = utc_timestamp();
    entry.response = response;
    s.history.push_back(std::move(entry));
    response["session_id"] = s.id;
    response["history_length"] = s.history.size();
    return response;
  });
}

nlohmann::json ExplanationService::submit_ranking(const std::string& id, const nlohmann::json& body) {
  store_.get(id);
  return fit_and_record(id, ranking_request_from_json(body));
}

nlohmann::json ExplanationService::refine(const std::string& id, const nlohmann::json& body) {
  const auto s = store_.get(id);
  auto request = ranking_request_from_json(body);
  if (!s.history.empty()) {
    const auto& last = s.history.back().request;
    if (!body.contains("strategies")) request.strategies = last.strategies;
    if (!body.contains("sampler")) request.sampler = last.sampler;
  }
  return fit_and_record(id, request);
}

nlohmann::json ExplanationService::state(const std::string& id) {
  auto j = session_to_json(store_.get(id));
  j["n_covering"] = j["covering"].size();
  if (!j["history"].empty()) j["current"] = j["history"].back()["response"]["results"];
  return j;
}

}  // namespace rulepref::interface
