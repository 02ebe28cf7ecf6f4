#pragma once

#include <memory>

#include "rashgam/dataset.hpp"
#include "rashgam/gam.hpp"
#include "rashgam/types.hpp"

namespace rashgam {

/// Convex total loss over the Rashomon coordinates. Everything that needs
/// L(ω) (fitting, precision, box oracle) goes through this interface so the
/// same code runs on GAM losses and on analytic quadratics.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  /// Total loss including constant terms.
  virtual double value(const Vec& w) const = 0;
  virtual Vec gradient(const Vec& w) const = 0;
  virtual Mat hessian(const Vec& w) const = 0;
};

/// GAM loss on a collapsed dataset (one bin per support run):
/// L_c + lambda2 L_2 + lambda_s * steps.
class GamObjective final : public Objective {
 public:
  GamObjective(BinnedDataset collapsed, double lambda2, double lambda_s, long steps);
  /// Collapses `data` by `support` and takes steps from the support.
  static GamObjective for_support(const BinnedDataset& data, const Support& support, double lambda2, double lambda_s);

  std::size_t dim() const override { return data_.dim(); }
  double value(const Vec& w) const override;
  Vec gradient(const Vec& w) const override;
  Mat hessian(const Vec& w) const override;

  const BinnedDataset& data() const { return data_; }
  double lambda2() const { return lambda2_; }
  double lambda_s() const { return lambda_s_; }
  long steps() const { return steps_; }
  double constant() const { return lambda_s_ * static_cast<double>(steps_); }

 private:
  BinnedDataset data_;
  double lambda2_;
  double lambda_s_;
  long steps_;
};

/// L(w) = offset + (w - a)^T M (w - a), M symmetric positive definite.
/// Its sublevel sets are exact ellipsoids, which makes it the reference
/// instance for the fitting and oracle tests.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Mat M, Vec a, double offset);

  std::size_t dim() const override { return static_cast<std::size_t>(a_.size()); }
  double value(const Vec& w) const override;
  Vec gradient(const Vec& w) const override;
  Mat hessian(const Vec&) const override { return 2.0 * M_; }

  const Mat& M() const { return M_; }
  const Vec& minimizer() const { return a_; }
  double offset() const { return offset_; }

 private:
  Mat M_;
  Vec a_;
  double offset_;
};

}  // namespace rashgam
