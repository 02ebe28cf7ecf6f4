#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rashgam/blocking.hpp"
#include "rashgam/ellipsoid.hpp"
#include "rashgam/objective.hpp"
#include "rashgam/rset_fit.hpp"

namespace rashgam {

struct PrecisionEstimate {
  std::size_t n_samples = 0;
  std::size_t n_inside = 0;
  double precision = 0.0;
  /// 1.96 sqrt(p (1 - p) / n)
  double half_width = 0.0;
};

PrecisionEstimate make_precision(std::size_t inside, std::size_t n);

/// Fraction of uniform draws from `e` with loss <= theta.
PrecisionEstimate estimate_precision(const Ellipsoid& e, const Objective& loss, double theta, std::size_t n_samples,
                                     Rng& rng);

/// precision * Vol(e) / Vol(true). Values above 1 indicate an inconsistent
/// volume estimate.
double recall_proxy(double precision, double log_vol_e, double log_vol_true);

enum class BaselineKind { Optimized, HessianInit, Sphere, BootstrapMvee };
std::string to_string(BaselineKind k);

/// c I centered at `center`, with c chosen so the log volume is `target_log_volume`.
Ellipsoid sphere_baseline(const Vec& center, double target_log_volume);

/// Coefficient vectors (run coordinates, intercept first) fitted on bootstrap
/// resamples with the same support. Occupancy is recomputed per resample;
/// bins that are empty in a resample keep the warm-start value.
std::vector<Vec> bootstrap_models(const BinnedDataset& data, const Support& support, std::size_t n_boot,
                                  double lambda2, Rng& rng, const ErmOptions& erm = {});

struct MveeOptions {
  double C = 1000.0;
  double learning_rate = 0.01;
  int iterations = 1000;
};

struct MveeResult {
  Ellipsoid ellipsoid;
  double covered = 0.0;  // fraction of input samples inside
  bool ridge_added = false;
};

/// Minimizes -det(Q)^{1/(2d)} + C mean(max(|Q^{1/2}(w_i - c)|^2 - 1, 0)) by
/// Adam, starting from the ZCA whitening of the samples (Q^{1/2} = Sigma^{-1/2},
/// c = mean). Samples are rows.
MveeResult mvee_fit(const Mat& samples, const MveeOptions& opt = {});

struct TradeoffPoint {
  double rho = 0.0;
  PrecisionEstimate precision;
};

std::vector<TradeoffPoint> tradeoff_curve(const Ellipsoid& e, const Objective& loss, double theta,
                                          const std::vector<double>& ratios, std::size_t n_samples,
                                          std::uint64_t seed);

/// Mean accuracy (threshold 0.5) of coefficient vector `w` on `data`.
double accuracy(const BinnedDataset& data, const Vec& w);
/// ROC AUC with ties counted one half.
double auc(const BinnedDataset& data, const Vec& w);

struct BaselineRow {
  BaselineKind kind;
  double log_volume = 0.0;
  PrecisionEstimate precision;
};

/// Precision of the optimized ellipsoid and the baselines, all rescaled to the
/// optimized ellipsoid's volume. `bootstrap` = 0 skips the MVEE baseline.
std::vector<BaselineRow> baseline_comparison(const BinnedDataset& data, const Support& support,
                                             const RashomonConfig& cfg, std::size_t n_samples, std::size_t bootstrap,
                                             std::uint64_t seed, std::optional<RashomonFit>* fit_out = nullptr);

struct RatioRow {
  MergePlan plan;
  bool skipped = false;
  std::string reason;
  double precision1 = 0.0;
  double precision2 = 0.0;
  double precision_ratio = 0.0;
  double volume_ratio = 0.0;
  double time1 = 0.0;  // seconds
  double time2 = 0.0;
};

struct RatioReport {
  double loss_star_parent = 0.0;
  double delta = 0.0;
  double theta_parent = 0.0;
  std::size_t K = 0;
  std::size_t K_tilde = 0;
  std::vector<RatioRow> rows;
};

/// Method 1 refit on each merged support versus the Method 2 slice of the
/// parent ellipsoid. delta = cfg.theta_mult * L*(parent); the parent is fitted
/// at delta + lambda_s (K - K_tilde).
RatioReport method_ratio_report(const BinnedDataset& data, const Support& parent, std::size_t K_tilde,
                                std::size_t n_plans, const RashomonConfig& cfg, std::size_t n_precision,
                                std::uint64_t seed);

}  // namespace rashgam
