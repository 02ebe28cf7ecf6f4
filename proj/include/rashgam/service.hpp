#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "rashgam/ellipsoid.hpp"
#include "rashgam/gam.hpp"
#include "rashgam/serialize.hpp"

namespace rashgam {

/// Model plus its Rashomon ellipsoid, as served. Immutable once built.
struct SessionState {
  GamModel model;
  Ellipsoid ellipsoid;
  std::string model_path;
  std::string ellipsoid_path;

  /// Throws DimensionError unless ellipsoid.dim() == 1 + K.
  SessionState(GamModel m, Ellipsoid e, std::string model_path = {}, std::string ellipsoid_path = {});
  static SessionState load(const std::string& model_path, const std::string& ellipsoid_path);
};

struct ApiRequest {
  std::string method;  // GET, POST, OPTIONS
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  json body;
};

/// Request handler over a shared snapshot. handle() is pure with respect to
/// the snapshot it reads; reload() swaps the snapshot atomically.
class Service {
 public:
  explicit Service(SessionState state);

  ApiResponse handle(const ApiRequest& req) const;
  void reload(SessionState state);
  std::shared_ptr<const SessionState> snapshot() const;

  /// Blocks serving HTTP until stop() is called from another thread.
  /// Returns false if the socket could not be bound.
  bool serve(const std::string& host, int port, const std::string& cors_origin = "*");
  /// Binds to an ephemeral port and returns it (for tests); serve_bound() then blocks.
  int bind_any(const std::string& host);
  bool serve_bound(const std::string& cors_origin = "*");
  void stop();

 private:
  struct Server;
  mutable std::mutex mu_;
  std::shared_ptr<const SessionState> state_;
  std::shared_ptr<Server> server_;
};

/// OpenAPI 3 description of the routes.
json openapi_spec();

}  // namespace rashgam
