#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rashgam/apps.hpp"
#include "rashgam/blocking.hpp"
#include "rashgam/ellipsoid.hpp"
#include "rashgam/eval.hpp"
#include "rashgam/gam.hpp"

namespace rashgam {

using json = nlohmann::json;

json vec_to_json(const Vec& v);
/// Throws DataError when `j` is not an array of numbers.
Vec vec_from_json(const json& j, const char* what = "vector");

/// Fields: feature_names, bin_edges, omega0, omega, lambda2, lambda_s,
/// support_runs, pi, data_path, and a read-only shape_functions view
/// (per feature, a list of {lo, hi, value} steps).
json model_to_json(const GamModel& m, const std::string& data_path = {});
GamModel model_from_json(const json& j, std::string* data_path = nullptr);

/// Fields: dim, center, Q (row-major), theta, lambda2, lambda_s, loss_at_center.
/// Unknown provenance values are written as null.
json ellipsoid_to_json(const Ellipsoid& e);
Ellipsoid ellipsoid_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
/// Two-space indent, trailing newline.
void write_json_file(const std::filesystem::path& path, const json& j);

json to_json(const VariableImportanceRange& r, const std::vector<std::string>& names);
json to_json(const JumpReport& r);
json to_json(const PrecisionEstimate& p);
json to_json(const ProjectionResult& r);
json to_json(const MonotoneResult& r);

void write_vi_csv(std::ostream& out, const std::vector<VariableImportanceRange>& rows,
                  const std::vector<std::string>& names);

}  // namespace rashgam
