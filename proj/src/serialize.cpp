#include "rashgam/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "rashgam/errors.hpp"

namespace rashgam {

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.at(key).is_number()) throw DataError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw DataError(std::string(what) + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError(std::string(what) + " must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json model_to_json(const GamModel& m, const std::string& data_path) {
  json j;
  j["feature_names"] = m.feature_names;
  j["bin_edges"] = m.bin_edges;
  j["omega0"] = m.intercept;
  j["omega"] = vec_to_json(m.omega);
  j["lambda2"] = m.lambda2;
  j["lambda_s"] = m.lambda_s;
  j["support_runs"] = m.support.run_lengths();
  j["pi"] = vec_to_json(m.pi);
  j["data_path"] = data_path;
  json shapes = json::array();
  std::size_t offset = 0;
  for (std::size_t f = 0; f < m.feature_names.size(); ++f) {
    json steps = json::array();
    const auto& e = m.bin_edges[f];
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
      steps.push_back({{"lo", e[k]}, {"hi", e[k + 1]}, {"value", m.omega(static_cast<Eigen::Index>(offset + k))}});
    }
    offset += e.size() - 1;
    shapes.push_back({{"feature", m.feature_names[f]}, {"steps", std::move(steps)}});
  }
  j["shape_functions"] = std::move(shapes);
  return j;
}

GamModel model_from_json(const json& j, std::string* data_path) {
  GamModel m;
  m.feature_names = get_as<std::vector<std::string>>(j, "feature_names");
  m.bin_edges = get_as<std::vector<std::vector<double>>>(j, "bin_edges");
  m.intercept = get_as<double>(j, "omega0");
  m.omega = vec_from_json(field(j, "omega"), "omega");
  m.lambda2 = get_as<double>(j, "lambda2");
  m.lambda_s = get_as<double>(j, "lambda_s");
  m.support = Support(get_as<std::vector<std::vector<std::size_t>>>(j, "support_runs"));
  m.pi = vec_from_json(field(j, "pi"), "pi");
  if (data_path) *data_path = j.value("data_path", std::string{});
  m.validate();
  return m;
}

json ellipsoid_to_json(const Ellipsoid& e) {
  json j;
  const auto d = static_cast<Eigen::Index>(e.dim());
  j["dim"] = e.dim();
  j["center"] = vec_to_json(e.center());
  json q = json::array();
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) q.push_back(e.Q()(r, c));
  j["Q"] = std::move(q);
  const auto& p = e.provenance();
  j["theta"] = number_or_null(p.theta);
  j["lambda2"] = number_or_null(p.lambda2);
  j["lambda_s"] = number_or_null(p.lambda_s);
  j["loss_at_center"] = number_or_null(p.loss_at_center);
  return j;
}

Ellipsoid ellipsoid_from_json(const json& j) {
  const auto d = get_as<std::size_t>(j, "dim");
  const Vec center = vec_from_json(field(j, "center"), "center");
  const Vec flat = vec_from_json(field(j, "Q"), "Q");
  if (static_cast<std::size_t>(center.size()) != d || static_cast<std::size_t>(flat.size()) != d * d) {
    throw DimensionError("ellipsoid: dim disagrees with center or Q");
  }
  const auto n = static_cast<Eigen::Index>(d);
  Mat Q(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) Q(r, c) = flat(r * n + c);
  Provenance p;
  p.theta = number_or_nan(j, "theta");
  p.lambda2 = number_or_nan(j, "lambda2");
  p.lambda_s = number_or_nan(j, "lambda_s");
  p.loss_at_center = number_or_nan(j, "loss_at_center");
  return Ellipsoid(std::move(Q), center, p);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json to_json(const VariableImportanceRange& r, const std::vector<std::string>& names) {
  return {{"feature", r.feature < names.size() ? names[r.feature] : std::to_string(r.feature)},
          {"index", r.feature},
          {"fix_others", r.mode == ViMode::FixOthers},
          {"vi_minus", r.vi_minus},
          {"vi_plus", r.vi_plus},
          {"vi_center", r.vi_center},
          {"argmin", vec_to_json(r.argmin)},
          {"argmax", vec_to_json(r.argmax)}};
}

json to_json(const JumpReport& r) {
  return {{"feature", r.feature}, {"k", r.boundary},
          {"n", r.n_samples},     {"tau", r.tau},
          {"down", r.down},       {"up", r.up},
          {"flat", r.flat},       {"fraction_down", r.fraction_down()},
          {"fraction_up", r.fraction_up()}, {"fraction_flat", r.fraction_flat()}};
}

json to_json(const PrecisionEstimate& p) {
  return {{"n_samples", p.n_samples},
          {"n_inside", p.n_inside},
          {"precision", p.precision},
          {"half_width", p.half_width}};
}

json to_json(const ProjectionResult& r) {
  return {{"omega", vec_to_json(r.omega)},
          {"distance", r.distance},
          {"inside_already", r.inside_already},
          {"mu", r.mu}};
}

json to_json(const MonotoneResult& r) {
  json mult = json::array();
  for (const auto& v : r.multipliers) mult.push_back(vec_to_json(v));
  return {{"omega", std::isfinite(r.q) ? vec_to_json(r.omega) : json(nullptr)},
          {"q", number_or_null(r.q)},
          {"feasible", r.feasible},
          {"multipliers", std::move(mult)},
          {"fix_multipliers", r.fix_multipliers},
          {"iterations", r.iterations}};
}

void write_vi_csv(std::ostream& out, const std::vector<VariableImportanceRange>& rows,
                  const std::vector<std::string>& names) {
  out << "feature,fix_others,vi_minus,vi_center,vi_plus\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << (r.feature < names.size() ? names[r.feature] : std::to_string(r.feature)) << ','
        << (r.mode == ViMode::FixOthers ? 1 : 0) << ',' << r.vi_minus << ',' << r.vi_center << ',' << r.vi_plus
        << '\n';
  }
}

}  // namespace rashgam
