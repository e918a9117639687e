#include "obj2text_tools/http_server.hpp"

#include <httplib.h>

namespace obj2text::tools {

struct HttpServer::Impl {
  std::shared_ptr<const CaptionService> service;
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ServiceReply& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json; charset=utf-8");
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<const CaptionService> service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto& server = impl_->server;
  const CaptionService* svc = impl_->service.get();

  // The layout composer is usually served from another origin.
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.Post("/caption", [svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc->caption(std::string_view(req.body)));
  });
  server.Get("/categories", [svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->categories());
  });
  server.Get("/health", [svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->health());
  });
  server.Get("/models", [svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->models());
  });
  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string detail = "unexpected failure";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          detail = e.what();
        } catch (...) {
        }
        reply(res, {500, {{"error", "internal"}, {"detail", detail}}});
      });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace obj2text::tools
