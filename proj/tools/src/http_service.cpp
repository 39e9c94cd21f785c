#include "http_service.hpp"

#include <charconv>
#include <optional>

#include <httplib.h>

#include "rulepref/error.hpp"

namespace rulepref::tools {

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, const std::string& reason, const std::string& message) {
  send(res, status, {{"error", reason}, {"message", message}});
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::optional<std::size_t> query_count(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const auto text = req.get_param_value(name);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError(std::string("query parameter '") + name + "' must be a nonnegative integer");
  }
  return v;
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, 200, f(req));
    } catch (const InfeasibleError& e) {
      send_error(res, 422, "no compatible additive model", e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not found", e.what());
    } catch (const ContractError& e) {
      send_error(res, 422, "invalid ranking", e.what());
    } catch (const DataError& e) {
      send_error(res, 400, "malformed request", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal error", e.what());
    }
  };
}

}  // namespace

HttpService::HttpService(interface::ExplanationService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.Post("/sessions", guarded([this](const httplib::Request& req) { return service_.create_session(parse_body(req)); }));
  s.Get("/sessions/:id/rules", guarded([this](const httplib::Request& req) {
          return service_.rules(req.path_params.at("id"), query_count(req, "offset").value_or(0),
                                query_count(req, "limit"));
        }));
  s.Post("/sessions/:id/ranking", guarded([this](const httplib::Request& req) {
           return service_.submit_ranking(req.path_params.at("id"), parse_body(req));
         }));
  s.Post("/sessions/:id/refine", guarded([this](const httplib::Request& req) {
           return service_.refine(req.path_params.at("id"), parse_body(req));
         }));
  s.Get("/sessions/:id", guarded([this](const httplib::Request& req) { return service_.state(req.path_params.at("id")); }));
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, "error", httplib::status_message(res.status));
  });
}

HttpService::~HttpService() = default;

bool HttpService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpService::listen_after_bind() { return server_->listen_after_bind(); }

void HttpService::stop() { server_->stop(); }

bool HttpService::running() const { return server_->is_running(); }

}  // namespace rulepref::tools
