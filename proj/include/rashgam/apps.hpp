#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rashgam/dataset.hpp"
#include "rashgam/ellipsoid.hpp"
#include "rashgam/gam.hpp"

namespace rashgam {

/// One feature's coefficients inside the ellipsoid coordinates, with their
/// occupancy weights.
struct FeatureRef {
  std::size_t offset = 0;  // ellipsoid coordinate of the first coefficient
  Vec weights;             // pi of each coefficient (run occupancy)
  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }

  /// Feature j of a collapsed dataset (coordinates 1 + block offset).
  static FeatureRef of(const BinnedDataset& collapsed, std::size_t j);
  /// Feature j from a model's support and bin occupancy (run weights summed).
  static FeatureRef of(const GamModel& model, std::size_t j);
};

enum class ViMode { Free, FixOthers };

struct VariableImportanceRange {
  std::size_t feature = 0;
  ViMode mode = ViMode::Free;
  double vi_minus = 0.0;
  double vi_plus = 0.0;
  double vi_center = 0.0;
  Vec argmin;
  Vec argmax;
};

/// sum_k pi_k |w_k| over the feature's coefficients.
double vi_point(const Vec& w, const FeatureRef& f);

struct ViOptions {
  /// 2^B enumeration guard for the upper bound.
  std::size_t max_upper_bins = 20;
  /// Sign enumeration guard for the lower bound; larger blocks go straight
  /// to the path solver.
  std::size_t max_lower_bins = 20;
};

struct ViBound {
  double value = 0.0;
  Vec point;
};

ViBound vi_lower(const Ellipsoid& e, const FeatureRef& f, ViMode mode, const ViOptions& opt = {});
ViBound vi_upper(const Ellipsoid& e, const FeatureRef& f, ViMode mode, const ViOptions& opt = {});
VariableImportanceRange vi_range(const Ellipsoid& e, const FeatureRef& f, std::size_t feature, ViMode mode,
                                 const ViOptions& opt = {});

enum class Direction { Increasing, Decreasing };

struct MonotoneConstraint {
  FeatureRef feature;  // only offset and size are used
  Direction direction = Direction::Increasing;
};

struct MonotoneResult {
  Vec omega;
  double q = 0.0;
  bool feasible = false;
  /// Multipliers of the order constraints, per constraint in input order
  /// (size - 1 entries each); all >= 0 at the optimum.
  std::vector<Vec> multipliers;
  /// Multipliers of the coordinate fixes, in input order.
  std::vector<double> fix_multipliers;
  int iterations = 0;
};

/// min (w - c)^T Q (w - c) subject to the order constraints and coordinate
/// fixes. Primal active set; every working set is a set of tied adjacent
/// coefficients plus fixed coordinates, solved through the merge algebra.
/// If the fixes contradict the order constraints, feasible = false and q = inf.
MonotoneResult monotone_fit(const Ellipsoid& e, const std::vector<MonotoneConstraint>& constraints,
                            const std::vector<std::pair<std::size_t, double>>& fixes = {});

struct ProjectionResult {
  Vec omega;
  double distance = 0.0;
  bool inside_already = false;
  double mu = 0.0;
};

/// Closest point of the ellipsoid to `request` in Euclidean norm.
ProjectionResult project_edit(const Ellipsoid& e, const Vec& request);

struct JumpReport {
  std::size_t feature = 0;
  std::size_t boundary = 0;
  std::size_t n_samples = 0;
  double tau = 0.0;
  std::size_t down = 0;
  std::size_t up = 0;
  std::size_t flat = 0;
  double fraction_down() const { return static_cast<double>(down) / static_cast<double>(n_samples); }
  double fraction_up() const { return static_cast<double>(up) / static_cast<double>(n_samples); }
  double fraction_flat() const { return static_cast<double>(flat) / static_cast<double>(n_samples); }
};

/// Classifies w_{k+1} - w_k of feature f across n uniform samples: down if
/// < -tau, up if > tau, flat otherwise.
JumpReport jump_analysis(const Ellipsoid& e, const FeatureRef& f, std::size_t feature, std::size_t boundary,
                         std::size_t n_samples, double tau, Rng& rng);

}  // namespace rashgam
