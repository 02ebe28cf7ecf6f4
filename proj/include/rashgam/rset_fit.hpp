#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "rashgam/ellipsoid.hpp"
#include "rashgam/gam.hpp"
#include "rashgam/objective.hpp"

namespace rashgam {

struct RashomonConfig {
  /// Absolute threshold. When NaN, theta = theta_mult * L(ω*).
  double theta = std::numeric_limits<double>::quiet_NaN();
  double theta_mult = 1.01;
  double lambda2 = 0.001;
  double lambda_s = 0.001;
  double C = 500.0;
  double learning_rate = 1e-4;
  int iterations = 1000;
  int samples_per_iter = 32;
  /// Best-iterate bookkeeping.
  int checkpoint_every = 50;
  int checkpoint_samples = 512;
  ErmOptions erm;

  double resolve_theta(double loss_star) const;
  void validate() const;
};

struct FitTrace {
  struct Row {
    int iter = 0;
    double objective = 0.0;
    double log_volume = 0.0;
    double overflow_mean = 0.0;
    double outside_frac = 0.0;
  };
  struct Checkpoint {
    int iter = 0;
    double objective = 0.0;
    double best_so_far = 0.0;
  };
  std::vector<Row> rows;
  std::vector<Checkpoint> checkpoints;
  int best_iter = 0;
  /// Times the factor was re-conditioned by eigenvalue clamping.
  int spd_repairs = 0;

  void write_csv(std::ostream& out) const;
};

/// Center at ω*, Q = H / (2 (theta - L(ω*))).
Ellipsoid hessian_init(const Objective& objective, const Vec& erm, double theta);

struct OptimizeResult {
  Ellipsoid ellipsoid;
  FitTrace trace;
};

/// Adam on (center, log-Cholesky factor of Q) for
///   det(Q)^{1/(2d)} + C * E[max(L(ω) - theta, 0)],
/// with ω = c + L^{-T} y and y uniform in the unit ball (fresh draws each
/// step). Returns the best checkpoint.
OptimizeResult optimize(const Ellipsoid& init, const Objective& objective, double theta, const RashomonConfig& cfg,
                        Rng& rng);

/// Estimate of the optimized objective on a fixed pool of ball points.
struct PenaltyEstimate {
  double objective = 0.0;
  double overflow_mean = 0.0;
  double outside_frac = 0.0;
};
PenaltyEstimate evaluate_objective(const Ellipsoid& e, const Objective& objective, double theta, double C,
                                   const Mat& ball_points);

/// Sampled penalty term and its gradient with respect to the optimizer
/// parameters (center, lower factor L with Q = L L^T) at fixed ball points.
/// Exposed for gradient checks.
struct PenaltyGradient {
  double value = 0.0;
  double outside_frac = 0.0;
  Vec d_center;
  Mat d_factor;  // lower triangular
};
PenaltyGradient penalty_gradient(const Vec& center, const Mat& factor, const Objective& objective, double theta,
                                 const Mat& ball_points);

struct RashomonFit {
  GamModel erm;
  double loss_star = 0.0;
  double theta = 0.0;
  Ellipsoid initial;
  Ellipsoid ellipsoid;
  FitTrace trace;
};

/// fit_erm, hessian_init, optimize. The ellipsoid lives on the support's run
/// coordinates (intercept first).
RashomonFit approximate(const BinnedDataset& data, const Support& support, const RashomonConfig& cfg, Rng& rng);

/// Same pipeline on an arbitrary objective whose minimizer is known.
RashomonFit approximate(const Objective& objective, const Vec& minimizer, const RashomonConfig& cfg, Rng& rng);

}  // namespace rashgam
