#pragma once

#include <memory>
#include <string>

#include "obj2text/service.hpp"

namespace obj2text::tools {

/// HTTP front end of a CaptionService:
///   POST /caption, GET /categories, GET /health, GET /models
/// Requests are served concurrently; the service is read-only.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const CaptionService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port or
  /// -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a successful bind().
  bool serve();
  void stop();
  /// Blocks until the server is accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace obj2text::tools
