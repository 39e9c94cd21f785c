#pragma once

#include <memory>
#include <string>

#include "rulepref/session.hpp"

namespace httplib {
class Server;
}

namespace rulepref::tools {

// JSON-over-HTTP front end for an ExplanationService.
class HttpService {
 public:
  explicit HttpService(interface::ExplanationService& service);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Blocks until stop(). Returns false if the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port without serving yet; returns it or -1.
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  interface::ExplanationService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace rulepref::tools
