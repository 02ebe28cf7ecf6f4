#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rashgam/dataset.hpp"
#include "rashgam/errors.hpp"
#include "rashgam/types.hpp"

namespace rashgam {

/// Partition of every feature's bins into contiguous runs that share one
/// coefficient. K = size() counts runs over all features.
class Support {
 public:
  Support() = default;
  explicit Support(std::vector<std::vector<std::size_t>> run_lengths);

  /// Every bin is its own run.
  static Support full(const BinnedDataset& data);
  /// Merges adjacent bins whose coefficients differ by at most `tol`.
  /// `coef` is intercept-first, length data.dim().
  static Support from_coefficients(const BinnedDataset& data, const Vec& coef, double tol);

  std::size_t features() const { return runs_.size(); }
  const std::vector<std::size_t>& runs(std::size_t feature) const { return runs_.at(feature); }
  const std::vector<std::vector<std::size_t>>& run_lengths() const { return runs_; }
  std::size_t size() const;
  std::size_t bins() const;
  /// Steps implied by the support, sum over features of (runs - 1).
  long steps() const;

  void validate(const BinnedDataset& data) const;
  bool operator==(const Support&) const = default;

 private:
  std::vector<std::vector<std::size_t>> runs_;
};

/// Dataset whose bins are the support's runs (edges and occupancy merged).
BinnedDataset collapse(const BinnedDataset& data, const Support& support);
/// Intercept-first run coefficients (1 + K) to intercept-first bin coefficients (1 + m).
Vec expand(const Support& support, const Vec& packed);
/// Inverse of expand; takes the first bin of every run.
Vec pack(const Support& support, const Vec& full);

struct GamModel {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> bin_edges;
  /// Bin occupancy of the training data (length m); kept for importance queries.
  Vec pi;
  double intercept = 0.0;
  /// Bin coefficients, length m.
  Vec omega;
  Support support;
  double lambda2 = 0.0;
  double lambda_s = 0.0;

  std::size_t m() const { return static_cast<std::size_t>(omega.size()); }
  /// (intercept, omega).
  Vec coefficients() const;
  /// (intercept, one coefficient per run): the Rashomon-set coordinates.
  Vec packed() const { return pack(support, coefficients()); }
  /// Throws if omega disagrees with the support runs.
  void validate() const;
};

struct LossBreakdown {
  double classification = 0.0;
  double l2 = 0.0;
  long steps = 0;
  double total = 0.0;
};

// All coefficient vectors below are intercept-first with length data.dim().

double classification_loss(const BinnedDataset& data, const Vec& coef);
/// sum_j sum_k pi_{j,k} w_{j,k}^2; the intercept is not penalized.
double penalty_l2(const BinnedDataset& data, const Vec& coef);
/// Adjacent within-feature pairs with different coefficients.
long penalty_steps(const BinnedDataset& data, const Vec& coef);
LossBreakdown total_loss(const BinnedDataset& data, const Vec& coef, double lambda2, double lambda_s);

/// Gradient of L_c + lambda2 * L_2.
Vec gradient(const BinnedDataset& data, const Vec& coef, double lambda2);
/// Hessian of L_c + lambda2 * L_2: (1/n) X^T S X + 2 lambda2 diag(0, pi).
Mat hessian(const BinnedDataset& data, const Vec& coef, double lambda2);

/// Per-row margins z_i = w0 + sum_j w_{j, bin(i,j)}.
Vec margins(const BinnedDataset& data, const Vec& coef);

double classification_loss(const GamModel& model, const BinnedDataset& data);
double penalty_l2(const GamModel& model, const BinnedDataset& data);
long penalty_steps(const GamModel& model);
LossBreakdown total_loss(const GamModel& model, const BinnedDataset& data);

struct ErmOptions {
  double tol = 1e-8;
  int max_iters = 200;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Vec last_iterate, double gradient_norm)
      : Error("no_convergence", what), last_(std::move(last_iterate)), grad_norm_(gradient_norm) {}
  const Vec& last_iterate() const { return last_; }
  double gradient_norm() const { return grad_norm_; }

 private:
  Vec last_;
  double grad_norm_;
};

/// Damped Newton with step halving on the support's run coordinates
/// (intercept first). Returns the minimizer of L_c + lambda2 L_2 on `data`.
Vec newton_minimize(const BinnedDataset& data, double lambda2, const ErmOptions& options, Vec start = {});

/// Empirical risk minimizer for a fixed support, expanded back to bins.
GamModel fit_erm(const BinnedDataset& data, const Support& support, double lambda2, double lambda_s,
                 const ErmOptions& options = {});

}  // namespace rashgam
