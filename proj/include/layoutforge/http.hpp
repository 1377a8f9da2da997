#pragma once

#include <string>

#include "layoutforge/service.hpp"

// After Eigen: the resolver header pulled in here defines a _res macro.
#include <httplib.h>

namespace layoutforge {

/// Routes every request of an httplib server to the service.
inline void mount(httplib::Server& server, Service& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const Response r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
}

/// Blocks serving on host:port. Returns false if the socket cannot be bound.
inline bool serve(const std::string& host, int port) {
  Service service;
  httplib::Server server;
  mount(server, service);
  return server.listen(host, port);
}

}  // namespace layoutforge
