#include "rashgam/service.hpp"

#include <httplib.h>

#include <cmath>
#include <utility>

#include "rashgam/apps.hpp"
#include "rashgam/errors.hpp"

namespace rashgam {

namespace {

struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Domain error carrying its own code (mapped to 422).
struct Unprocessable : Error {
  Unprocessable(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

json parse_body(const std::string& body) {
  if (body.empty()) throw BadRequest("request body is empty");
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw BadRequest("request body is not valid JSON");
  if (!j.is_object()) throw BadRequest("request body must be a JSON object");
  return j;
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw BadRequest(std::string("missing field '") + key + "'");
  return j.at(key);
}

long long require_int(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) throw BadRequest(std::string("field '") + key + "' must be an integer");
  return v.get<long long>();
}

double optional_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw BadRequest(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

/// Packed (1 + K) or full (1 + m) coefficient vector to packed coordinates.
Vec read_coefficients(const SessionState& s, const json& v, const char* key) {
  if (!v.is_array()) throw BadRequest(std::string("field '") + key + "' must be an array of numbers");
  Vec w(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw BadRequest(std::string("field '") + key + "' must be an array of numbers");
    w(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  const std::size_t packed = s.ellipsoid.dim();
  const std::size_t full = 1 + s.model.m();
  const auto n = static_cast<std::size_t>(w.size());
  if (n == packed) return w;
  if (n == full) {
    const Vec p = pack(s.model.support, w);
    if ((expand(s.model.support, p) - w).cwiseAbs().maxCoeff() > 0.0) {
      throw Unprocessable("off_support", std::string("'") + key + "' is not constant within the model's support runs");
    }
    return p;
  }
  throw DimensionError(std::string("'") + key + "' has length " + std::to_string(n) + ", expected " +
                       std::to_string(packed) + " (runs) or " + std::to_string(full) + " (bins)");
}

json coefficients_json(const SessionState& s, const Vec& packed) {
  return {{"omega", vec_to_json(packed)}, {"omega_full", vec_to_json(expand(s.model.support, packed))}};
}

std::size_t read_feature(const SessionState& s, const json& v) {
  const auto& names = s.model.feature_names;
  if (v.is_string()) {
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j] == v.get<std::string>()) return j;
    throw Unprocessable("unknown_feature", "no feature named '" + v.get<std::string>() + "'");
  }
  if (!v.is_number_integer()) throw BadRequest("'feature' must be a name or an index");
  const auto j = v.get<long long>();
  if (j < 0 || static_cast<std::size_t>(j) >= names.size()) {
    throw Unprocessable("unknown_feature", "feature index " + std::to_string(j) + " out of range");
  }
  return static_cast<std::size_t>(j);
}

Direction read_direction(const json& v) {
  if (!v.is_string()) throw BadRequest("'direction' must be \"increasing\" or \"decreasing\"");
  const auto d = v.get<std::string>();
  if (d == "increasing" || d == "up") return Direction::Increasing;
  if (d == "decreasing" || d == "down") return Direction::Decreasing;
  throw BadRequest("'direction' must be \"increasing\" or \"decreasing\"");
}

bool read_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0" || s.empty()) return false;
  throw BadRequest("boolean query parameter must be true or false");
}

json meta(const SessionState& s) {
  const auto& p = s.ellipsoid.provenance();
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"dim", s.ellipsoid.dim()},
          {"K", s.model.support.size()},
          {"theta", num(p.theta)},
          {"lambda2", num(p.lambda2)},
          {"lambda_s", num(p.lambda_s)},
          {"loss_at_center", num(p.loss_at_center)},
          {"log_volume", s.ellipsoid.log_volume()},
          {"feature_names", s.model.feature_names}};
}

ApiResponse route(const SessionState& s, const ApiRequest& req) {
  const std::string& path = req.path;
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";

  if (get && path == "/api/model") return {200, model_to_json(s.model)};
  if (get && path == "/api/ellipsoid/meta") return {200, meta(s)};
  if (get && path == "/api/spec") return {200, openapi_spec()};

  if (get && path == "/api/vi") {
    const auto it = req.query.find("fix_others");
    const bool fix = it != req.query.end() && read_bool(it->second);
    json rows = json::array();
    for (std::size_t j = 0; j < s.model.feature_names.size(); ++j) {
      const auto r = vi_range(s.ellipsoid, FeatureRef::of(s.model, j), j, fix ? ViMode::FixOthers : ViMode::Free);
      rows.push_back(to_json(r, s.model.feature_names));
    }
    return {200, {{"fix_others", fix}, {"rows", std::move(rows)}}};
  }

  if (post && path == "/api/contains") {
    const json body = parse_body(req.body);
    const Vec w = read_coefficients(s, require(body, "omega"), "omega");
    const Membership m = s.ellipsoid.contains(w);
    return {200, {{"q", m.q}, {"inside", m.inside}}};
  }

  if (post && path == "/api/project") {
    const json body = parse_body(req.body);
    const Vec w = read_coefficients(s, require(body, "omega_req"), "omega_req");
    const ProjectionResult r = project_edit(s.ellipsoid, w);
    json out = coefficients_json(s, r.omega);
    out["distance"] = r.distance;
    out["inside_already"] = r.inside_already;
    return {200, out};
  }

  if (post && path == "/api/monotone") {
    const json body = parse_body(req.body);
    std::vector<MonotoneConstraint> cons;
    cons.push_back({FeatureRef::of(s.model, read_feature(s, require(body, "feature"))),
                    read_direction(require(body, "direction"))});
    std::vector<std::pair<std::size_t, double>> fixes;
    if (body.contains("extra")) {
      const json& extra = body.at("extra");
      if (!extra.is_array()) throw BadRequest("'extra' must be an array");
      for (const json& e : extra) {
        if (!e.is_object()) throw BadRequest("'extra' entries must be objects");
        if (e.contains("feature")) {
          cons.push_back({FeatureRef::of(s.model, read_feature(s, e.at("feature"))),
                          read_direction(require(e, "direction"))});
        } else {
          const auto idx = require_int(e, "index");
          const json& val = require(e, "value");
          if (!val.is_number()) throw BadRequest("'value' must be a number");
          if (idx < 0 || static_cast<std::size_t>(idx) >= s.ellipsoid.dim()) {
            throw DimensionError("fixed coordinate " + std::to_string(idx) + " out of range");
          }
          fixes.emplace_back(static_cast<std::size_t>(idx), val.get<double>());
        }
      }
    }
    const MonotoneResult r = monotone_fit(s.ellipsoid, cons, fixes);
    json out = std::isfinite(r.q) ? coefficients_json(s, r.omega) : json{{"omega", nullptr}, {"omega_full", nullptr}};
    out["q"] = std::isfinite(r.q) ? json(r.q) : json(nullptr);
    out["feasible"] = r.feasible;
    return {200, out};
  }

  if (post && path == "/api/sample") {
    const json body = parse_body(req.body);
    const auto n = require_int(body, "n");
    const auto seed = require_int(body, "seed");
    if (n < 1 || n > 100000) throw Unprocessable("bad_sample_count", "n must be in [1, 100000]");
    Rng rng(static_cast<std::uint64_t>(seed));
    const Mat pts = s.ellipsoid.sample(rng, static_cast<std::size_t>(n));
    json samples = json::array();
    for (Eigen::Index i = 0; i < pts.cols(); ++i) samples.push_back(vec_to_json(pts.col(i)));
    return {200, {{"n", n}, {"seed", seed}, {"samples", std::move(samples)}}};
  }

  if (post && path == "/api/jumps") {
    const json body = parse_body(req.body);
    const std::size_t feature = read_feature(s, require(body, "feature"));
    const auto k = require_int(body, "k");
    const auto n = require_int(body, "n");
    const auto seed = require_int(body, "seed");
    const double tau = optional_number(body, "tau", 0.0);
    if (k < 0) throw Unprocessable("spec_error", "k must be non-negative");
    if (n < 1 || n > 1000000) throw Unprocessable("bad_sample_count", "n must be in [1, 1000000]");
    Rng rng(static_cast<std::uint64_t>(seed));
    const JumpReport r = jump_analysis(s.ellipsoid, FeatureRef::of(s.model, feature), feature,
                                       static_cast<std::size_t>(k), static_cast<std::size_t>(n), tau, rng);
    return {200, to_json(r)};
  }

  static const char* known[] = {"/api/model",   "/api/ellipsoid/meta", "/api/spec",   "/api/vi", "/api/contains",
                                "/api/project", "/api/monotone",       "/api/sample", "/api/jumps"};
  for (const char* k : known)
    if (path == k) return error_response(405, "method_not_allowed", req.method + " not supported on " + path);
  return error_response(404, "not_found", "no route " + path);
}

}  // namespace

SessionState::SessionState(GamModel m, Ellipsoid e, std::string mp, std::string ep)
    : model(std::move(m)), ellipsoid(std::move(e)), model_path(std::move(mp)), ellipsoid_path(std::move(ep)) {
  model.validate();
  if (ellipsoid.dim() != 1 + model.support.size()) {
    throw DimensionError("ellipsoid dimension " + std::to_string(ellipsoid.dim()) + " does not match model (1 + " +
                         std::to_string(model.support.size()) + " runs)");
  }
}

SessionState SessionState::load(const std::string& model_path, const std::string& ellipsoid_path) {
  return SessionState(model_from_json(read_json_file(model_path)), ellipsoid_from_json(read_json_file(ellipsoid_path)),
                      model_path, ellipsoid_path);
}

struct Service::Server {
  httplib::Server http;
};

Service::Service(SessionState state) : state_(std::make_shared<const SessionState>(std::move(state))) {}

std::shared_ptr<const SessionState> Service::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return state_;
}

void Service::reload(SessionState state) {
  auto next = std::make_shared<const SessionState>(std::move(state));
  std::lock_guard<std::mutex> lock(mu_);
  state_ = std::move(next);
}

ApiResponse Service::handle(const ApiRequest& req) const {
  const auto s = snapshot();
  try {
    return route(*s, req);
  } catch (const BadRequest& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const DataError& e) {
    return error_response(400, e.code(), e.what());
  } catch (const DimensionError& e) {
    return error_response(409, e.code(), e.what());
  } catch (const Error& e) {
    return error_response(422, e.code(), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

namespace {

void install(httplib::Server& http, const Service& svc, const std::string& origin) {
  auto forward = [&svc, origin](const httplib::Request& hreq, httplib::Response& hres) {
    hres.set_header("Access-Control-Allow-Origin", origin);
    hres.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    hres.set_header("Access-Control-Allow-Headers", "Content-Type");
    if (hreq.method == "OPTIONS") {
      hres.status = 204;
      return;
    }
    ApiRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query[k] = v;
    req.body = hreq.body;
    const ApiResponse res = svc.handle(req);
    hres.status = res.status;
    hres.set_content(res.body.dump(), "application/json; charset=utf-8");
  };
  const std::string any = R"(/api/.*)";
  http.Get(any, forward);
  http.Post(any, forward);
  http.Options(any, forward);
}

}  // namespace

bool Service::serve(const std::string& host, int port, const std::string& cors_origin) {
  server_ = std::make_shared<Server>();
  install(server_->http, *this, cors_origin);
  return server_->http.listen(host, port);
}

int Service::bind_any(const std::string& host) {
  server_ = std::make_shared<Server>();
  return server_->http.bind_to_any_port(host);
}

bool Service::serve_bound(const std::string& cors_origin) {
  if (!server_) throw SpecError("serve_bound: call bind_any first");
  install(server_->http, *this, cors_origin);
  return server_->http.listen_after_bind();
}

void Service::stop() {
  if (server_) server_->http.stop();
}

namespace {

json body_schema(json properties, json required) {
  json schema = {{"type", "object"}, {"properties", std::move(properties)}, {"required", std::move(required)}};
  json media;
  media["application/json"]["schema"] = std::move(schema);
  return {{"required", true}, {"content", std::move(media)}};
}

json number_array() { return {{"type", "array"}, {"items", {{"type", "number"}}}}; }
json integer() { return {{"type", "integer"}}; }
json name_or_index() { return {{"oneOf", json::array({integer(), json{{"type", "string"}}})}}; }

json responses(const char* what, bool with_errors = true) {
  json r;
  r["200"]["description"] = what;
  if (with_errors) {
    r["400"]["description"] = "malformed body";
    r["409"]["description"] = "dimension mismatch";
    r["422"]["description"] = "domain error; error.code is machine readable";
  }
  return r;
}

}  // namespace

json openapi_spec() {
  json paths;
  paths["/api/model"]["get"] = {{"summary", "Model with shape functions as step lists"},
                                {"responses", responses("model JSON", false)}};
  paths["/api/ellipsoid/meta"]["get"] = {{"summary", "Ellipsoid dimension, theta, log volume, loss at center"},
                                         {"responses", responses("metadata", false)}};
  paths["/api/contains"]["post"] = {{"summary", "Membership of a coefficient vector (runs or bins)"},
                                    {"requestBody", body_schema({{"omega", number_array()}}, {"omega"})},
                                    {"responses", responses("{q, inside}")}};
  paths["/api/project"]["post"] = {{"summary", "Closest in-set model to an edited vector"},
                                   {"requestBody", body_schema({{"omega_req", number_array()}}, {"omega_req"})},
                                   {"responses", responses("{omega, omega_full, distance, inside_already}")}};
  json direction = {{"type", "string"}, {"enum", {"increasing", "decreasing"}}};
  json extra = {{"type", "array"}, {"items", {{"type", "object"}}}};
  paths["/api/monotone"]["post"] = {
      {"summary", "Closest monotone model; extra holds {feature, direction} or {index, value} entries"},
      {"requestBody",
       body_schema({{"feature", name_or_index()}, {"direction", direction}, {"extra", extra}}, {"feature", "direction"})},
      {"responses", responses("{omega, omega_full, q, feasible}")}};
  json fix_param = {{"name", "fix_others"}, {"in", "query"}, {"required", false}, {"schema", {{"type", "boolean"}}}};
  paths["/api/vi"]["get"] = {{"summary", "Variable importance ranges per feature"},
                             {"parameters", json::array({fix_param})},
                             {"responses", responses("{fix_others, rows}")}};
  paths["/api/sample"]["post"] = {{"summary", "Uniform samples from the ellipsoid"},
                                  {"requestBody", body_schema({{"n", integer()}, {"seed", integer()}}, {"n", "seed"})},
                                  {"responses", responses("{n, seed, samples}")}};
  paths["/api/jumps"]["post"] = {
      {"summary", "Direction of the step between runs k and k+1 across samples"},
      {"requestBody", body_schema({{"feature", name_or_index()},
                                   {"k", integer()},
                                   {"n", integer()},
                                   {"tau", {{"type", "number"}}},
                                   {"seed", integer()}},
                                  {"feature", "k", "n", "seed"})},
      {"responses", responses("JumpReport")}};
  paths["/api/spec"]["get"] = {{"summary", "This document"}, {"responses", responses("OpenAPI 3 JSON", false)}};
  json info = {{"title", "rashgam service"}, {"version", "1.0.0"}};
  return {{"openapi", "3.0.3"}, {"info", std::move(info)}, {"paths", std::move(paths)}};
}

}  // namespace rashgam
