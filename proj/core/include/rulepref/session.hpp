#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulepref/blackbox.hpp"
#include "rulepref/personalize.hpp"
#include "rulepref/rulegen.hpp"

namespace rulepref::interface {

inline constexpr std::size_t kRankingWarnAbove = 20;

struct RankingRequest {
  std::vector<prefmodel::RuleId> ranking;
  std::vector<prefmodel::Strategy> strategies = prefmodel::all_strategies();
  prefmodel::SamplerOptions sampler;
};

// Throws DataError on a malformed body.
RankingRequest ranking_request_from_json(const nlohmann::json& j);
nlohmann::json ranking_request_to_json(const RankingRequest& r);

// Fits the requested strategies over rx and renders every ranked rule with
// its stored metrics, score and discovery flag. Shared by the CLI and the
// HTTP service. Throws ContractError for rankings outside rx and
// InfeasibleError when no compatible model exists.
nlohmann::json fit_explanation(const rulegen::RuleSet& rules, const std::vector<rulegen::Rule>& rx,
                               const RankingRequest& request);

struct HistoryEntry {
  RankingRequest request;
  std::string timestamp;
  nlohmann::json response;
};

struct ExplanationSession {
  std::string id;
  std::string created;
  nlohmann::json instance;  // {feature: value}
  int predicted_label = 0;
  double probability = 0.0;
  std::vector<prefmodel::RuleId> covering;  // R_x in presentation order
  std::string ruleset_hash;
  std::vector<HistoryEntry> history;

  bool operator==(const ExplanationSession& other) const;
};

nlohmann::json session_to_json(const ExplanationSession& s);
ExplanationSession session_from_json(const nlohmann::json& j);

void save_session(const std::filesystem::path& file, const ExplanationSession& s);
// Throws NotFoundError when absent and DataError (with the path) when corrupt.
ExplanationSession load_session(const std::filesystem::path& file);

// In-memory sessions with write-through JSON files. Mutations of one session
// are serialized; distinct sessions proceed in parallel.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path directory = {});

  const std::filesystem::path& directory() const noexcept { return directory_; }
  std::string insert(ExplanationSession session);
  ExplanationSession get(const std::string& id);

  template <typename F>
  auto update(const std::string& id, F&& mutate) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    ExplanationSession copy = entry->session;
    auto result = mutate(copy);
    persist(copy);
    entry->session = std::move(copy);
    return result;
  }

 private:
  struct Entry {
    std::mutex mutex;
    ExplanationSession session;
  };

  std::shared_ptr<Entry> find(const std::string& id);
  void persist(const ExplanationSession& s) const;
  std::filesystem::path file_of(const std::string& id) const;

  std::filesystem::path directory_;
  std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;
};

// The elicitation loop over immutable artifacts.
class ExplanationService {
 public:
  ExplanationService(const rulegen::RuleSet& rules, const blackbox::LabelProvider& model, SessionStore& store);

  nlohmann::json create_session(const nlohmann::json& instance);
  nlohmann::json rules(const std::string& id, std::size_t offset, std::optional<std::size_t> limit);
  nlohmann::json submit_ranking(const std::string& id, const nlohmann::json& body);
  // Like submit_ranking; strategies and sampler default to the last entry's.
  nlohmann::json refine(const std::string& id, const nlohmann::json& body);
  nlohmann::json state(const std::string& id);

 private:
  nlohmann::json fit_and_record(const std::string& id, const RankingRequest& request);

  const rulegen::RuleSet& rules_;
  const blackbox::LabelProvider& model_;
  SessionStore& store_;
  std::string ruleset_hash_;
};

std::string utc_timestamp();

}  // namespace rulepref::interface
