#include "rashgam/objective.hpp"

#include "rashgam/errors.hpp"

namespace rashgam {

GamObjective::GamObjective(BinnedDataset collapsed, double lambda2, double lambda_s, long steps)
    : data_(std::move(collapsed)), lambda2_(lambda2), lambda_s_(lambda_s), steps_(steps) {
  if (lambda2 < 0 || lambda_s < 0) throw SpecError("penalty weights must be non-negative");
}

GamObjective GamObjective::for_support(const BinnedDataset& data, const Support& support, double lambda2,
                                       double lambda_s) {
  return GamObjective(collapse(data, support), lambda2, lambda_s, support.steps());
}

double GamObjective::value(const Vec& w) const {
  return classification_loss(data_, w) + lambda2_ * penalty_l2(data_, w) + constant();
}

Vec GamObjective::gradient(const Vec& w) const { return rashgam::gradient(data_, w, lambda2_); }

Mat GamObjective::hessian(const Vec& w) const { return rashgam::hessian(data_, w, lambda2_); }

QuadraticObjective::QuadraticObjective(Mat M, Vec a, double offset)
    : M_(std::move(M)), a_(std::move(a)), offset_(offset) {
  if (M_.rows() != M_.cols() || M_.rows() != a_.size()) throw DimensionError("quadratic objective: shape mismatch");
  M_ = 0.5 * (M_ + M_.transpose()).eval();
}

double QuadraticObjective::value(const Vec& w) const {
  if (w.size() != a_.size()) throw DimensionError("quadratic objective: wrong point dimension");
  const Vec r = w - a_;
  return offset_ + r.dot(M_ * r);
}

Vec QuadraticObjective::gradient(const Vec& w) const {
  if (w.size() != a_.size()) throw DimensionError("quadratic objective: wrong point dimension");
  return 2.0 * M_ * (w - a_);
}

}  // namespace rashgam
