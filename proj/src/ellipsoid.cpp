#include "rashgam/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rashgam/errors.hpp"

namespace rashgam {

double unit_ball_log_volume(std::size_t d) {
  const double dd = static_cast<double>(d);
  return 0.5 * dd * std::log(std::numbers::pi) - std::lgamma(0.5 * dd + 1.0);
}

Vec sample_unit_ball(std::size_t d, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec y(static_cast<Eigen::Index>(d));
  double norm = 0.0;
  do {
    for (auto& v : y) v = gauss(rng);
    norm = y.norm();
  } while (norm == 0.0);
  const double r = std::pow(unif(rng), 1.0 / static_cast<double>(d));
  return y * (r / norm);
}

Ellipsoid::Ellipsoid(Mat Q, Vec center, Provenance provenance)
    : Q_(std::move(Q)), center_(std::move(center)), prov_(provenance) {
  if (Q_.rows() != Q_.cols() || Q_.rows() != center_.size() || center_.size() == 0) {
    throw DimensionError("ellipsoid: Q must be square and match the center dimension");
  }
  if (!Q_.allFinite() || !center_.allFinite()) throw NumericalError("ellipsoid: non-finite entries");
  const double scale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
  if ((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw SpecError("ellipsoid: Q is not symmetric");
  }
  Q_ = 0.5 * (Q_ + Q_.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> es(Q_);
  if (es.info() != Eigen::Success) throw NumericalError("ellipsoid: eigendecomposition failed");
  // Eigen returns ascending order.
  eig_.lambda = es.eigenvalues().reverse();
  eig_.V = es.eigenvectors().rowwise().reverse();
  const double lmax = eig_.lambda(0);
  const double lmin = eig_.lambda(eig_.lambda.size() - 1);
  if (!(lmax > 0) || !(lmin > 1e-12 * lmax)) {
    throw SpecError("ellipsoid: Q is not positive definite (eigenvalues " + std::to_string(lmin) + " .. " +
                    std::to_string(lmax) + ")");
  }
  inv_sqrt_ = eig_.V * eig_.lambda.cwiseSqrt().cwiseInverse().asDiagonal() * eig_.V.transpose();
}

Ellipsoid Ellipsoid::with_provenance(Provenance p) const {
  Ellipsoid e = *this;
  e.prov_ = p;
  return e;
}

double Ellipsoid::quad_form(const Vec& w) const {
  if (w.size() != center_.size()) throw DimensionError("ellipsoid: point has wrong dimension");
  const Vec r = w - center_;
  return r.dot(Q_ * r);
}

Membership Ellipsoid::contains(const Vec& w) const {
  const double q = quad_form(w);
  return {q, q <= 1.0};
}

Mat Ellipsoid::inverse() const {
  return eig_.V * eig_.lambda.cwiseInverse().asDiagonal() * eig_.V.transpose();
}

Vec Ellipsoid::sample(Rng& rng) const { return inv_sqrt_ * sample_unit_ball(dim(), rng) + center_; }

Mat Ellipsoid::sample(Rng& rng, std::size_t n) const {
  Mat out(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out.col(static_cast<Eigen::Index>(i)) = sample(rng);
  return out;
}

double Ellipsoid::log_volume() const {
  return unit_ball_log_volume(dim()) - 0.5 * eig_.lambda.array().log().sum();
}

LinearMin Ellipsoid::minimize_linear(const Vec& c) const {
  if (c.size() != center_.size()) throw DimensionError("minimize_linear: wrong dimension");
  if (c.cwiseAbs().maxCoeff() == 0.0) throw SpecError("minimize_linear: zero objective");
  const Vec z = eig_.V.transpose() * c;
  const Vec qinv_c = eig_.V * z.cwiseQuotient(eig_.lambda);
  const double s = std::sqrt(z.cwiseAbs2().cwiseQuotient(eig_.lambda).sum());
  LinearMin out;
  out.point = center_ - qinv_c / s;
  out.value = c.dot(center_) - s;
  return out;
}

Ellipsoid Ellipsoid::rescaled(double rho) const {
  if (!(rho > 0) || !std::isfinite(rho)) throw SpecError("rescale factor must be positive");
  return Ellipsoid(Q_ / (rho * rho), center_, prov_);
}

double Ellipsoid::scale_for_log_volume(double target_log_volume) const {
  return std::exp((target_log_volume - log_volume()) / static_cast<double>(dim()));
}

Slice Ellipsoid::slice_fix_coords(const std::vector<std::pair<std::size_t, double>>& fixed) const {
  const std::size_t d = dim();
  std::vector<char> is_fixed(d, 0);
  Vec anchor = center_;
  for (const auto& [idx, value] : fixed) {
    if (idx >= d) throw DimensionError("slice: coordinate index out of range");
    is_fixed[idx] = 1;
    anchor(static_cast<Eigen::Index>(idx)) = value;
  }
  Slice s;
  std::vector<std::size_t> fix;
  for (std::size_t i = 0; i < d; ++i) (is_fixed[i] ? fix : s.free).push_back(i);

  const auto nf = static_cast<Eigen::Index>(s.free.size());
  const auto nx = static_cast<Eigen::Index>(fix.size());
  Vec delta(nx);
  for (Eigen::Index a = 0; a < nx; ++a) {
    delta(a) = anchor(static_cast<Eigen::Index>(fix[a])) - center_(static_cast<Eigen::Index>(fix[a]));
  }
  Mat qff(nf, nf);
  Mat qfx(nf, nx);
  for (Eigen::Index a = 0; a < nf; ++a) {
    for (Eigen::Index b = 0; b < nf; ++b) qff(a, b) = Q_(static_cast<Eigen::Index>(s.free[a]), static_cast<Eigen::Index>(s.free[b]));
    for (Eigen::Index b = 0; b < nx; ++b) qfx(a, b) = Q_(static_cast<Eigen::Index>(s.free[a]), static_cast<Eigen::Index>(fix[b]));
  }
  double min_q = 0.0;
  if (nx > 0) {
    Mat qxx(nx, nx);
    for (Eigen::Index a = 0; a < nx; ++a)
      for (Eigen::Index b = 0; b < nx; ++b) qxx(a, b) = Q_(static_cast<Eigen::Index>(fix[a]), static_cast<Eigen::Index>(fix[b]));
    min_q = delta.dot(qxx * delta);
    if (nf > 0) {
      // Conditional minimizer over the free block: shift = -Q_FF^{-1} Q_FX delta.
      const Eigen::LLT<Mat> llt(qff);
      if (llt.info() != Eigen::Success) throw NumericalError("slice: free block is not positive definite");
      const Vec rhs = qfx * delta;
      const Vec shift = llt.solve(rhs);
      min_q -= rhs.dot(shift);
      for (Eigen::Index a = 0; a < nf; ++a) anchor(static_cast<Eigen::Index>(s.free[a])) -= shift(a);
    }
  }
  s.level = 1.0 - min_q;
  s.anchor = std::move(anchor);
  s.free_Q = std::move(qff);
  return s;
}

std::optional<Ellipsoid> Slice::ellipsoid() const {
  if (empty() || free.empty()) return std::nullopt;
  Vec c(static_cast<Eigen::Index>(free.size()));
  for (std::size_t a = 0; a < free.size(); ++a) c(static_cast<Eigen::Index>(a)) = anchor(static_cast<Eigen::Index>(free[a]));
  return Ellipsoid(free_Q / level, std::move(c));
}

Vec Slice::lift(const Vec& free_values) const {
  if (static_cast<std::size_t>(free_values.size()) != free.size()) throw DimensionError("slice lift: wrong length");
  Vec out = anchor;
  for (std::size_t a = 0; a < free.size(); ++a) out(static_cast<Eigen::Index>(free[a])) = free_values(static_cast<Eigen::Index>(a));
  return out;
}

}  // namespace rashgam
