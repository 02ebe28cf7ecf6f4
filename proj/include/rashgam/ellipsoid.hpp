#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rashgam/types.hpp"

namespace rashgam {

/// Threshold and penalties an ellipsoid was fitted for. NaN when unknown.
struct Provenance {
  double theta = std::numeric_limits<double>::quiet_NaN();
  double lambda2 = std::numeric_limits<double>::quiet_NaN();
  double lambda_s = std::numeric_limits<double>::quiet_NaN();
  double loss_at_center = std::numeric_limits<double>::quiet_NaN();
};

struct EigenFactors {
  Vec lambda;  // descending
  Mat V;
};

struct Membership {
  double q = 0.0;
  bool inside = false;
};

struct LinearMin {
  Vec point;
  double value = 0.0;
};

class Ellipsoid;

/// Result of fixing some coordinates of an ellipsoid.
struct Slice {
  /// Free coordinate indices in increasing order.
  std::vector<std::size_t> free;
  /// 1 - min over free coordinates of the quadratic form; the slice is empty when <= 0.
  double level = 0.0;
  /// Full-length point: fixed values plus the conditional center on the free coordinates.
  Vec anchor;
  /// Normalized ellipsoid on the free coordinates; empty when level <= 0 or nothing is free.
  std::optional<Ellipsoid> ellipsoid() const;
  bool empty() const { return !(level > 0.0); }

  /// Full-length point with the free coordinates set to `free_values`.
  Vec lift(const Vec& free_values) const;

  Mat free_Q;  // unnormalized, (Q_FF)
};

/// {ω : (ω - c)^T Q (ω - c) <= 1} with Q symmetric positive definite.
class Ellipsoid {
 public:
  /// Validates symmetry (1e-10 relative) and definiteness; eigenvalues below
  /// 1e-12 * lambda_max are rejected.
  Ellipsoid(Mat Q, Vec center, Provenance provenance = {});

  std::size_t dim() const { return static_cast<std::size_t>(center_.size()); }
  const Mat& Q() const { return Q_; }
  const Vec& center() const { return center_; }
  const EigenFactors& eigen() const { return eig_; }
  const Provenance& provenance() const { return prov_; }
  Ellipsoid with_provenance(Provenance p) const;

  double quad_form(const Vec& w) const;
  Membership contains(const Vec& w) const;

  /// Q^{-1}, from the eigendecomposition.
  Mat inverse() const;
  /// Q^{-1/2}; maps the unit ball onto the centered ellipsoid.
  const Mat& inv_sqrt() const { return inv_sqrt_; }

  /// One uniform draw: Gaussian direction, normalized, radius U^{1/d}, then
  /// x = Q^{-1/2} y + c.
  Vec sample(Rng& rng) const;
  /// n draws as columns.
  Mat sample(Rng& rng, std::size_t n) const;

  double log_volume() const;

  /// argmin c^T ω over the ellipsoid.
  LinearMin minimize_linear(const Vec& c) const;

  /// Radii scaled by rho: Q / rho^2.
  Ellipsoid rescaled(double rho) const;
  /// Linear factor that brings log_volume() to `target_log_volume`.
  double scale_for_log_volume(double target_log_volume) const;

  Slice slice_fix_coords(const std::vector<std::pair<std::size_t, double>>& fixed) const;

 private:
  Mat Q_;
  Vec center_;
  EigenFactors eig_;
  Mat inv_sqrt_;
  Provenance prov_;
};

/// log of the volume of the unit ball in R^d.
double unit_ball_log_volume(std::size_t d);

/// Uniform point in the unit ball of R^d by the direction/radius recipe.
Vec sample_unit_ball(std::size_t d, Rng& rng);

}  // namespace rashgam
