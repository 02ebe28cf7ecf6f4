#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rashgam/box_oracle.hpp"
#include "rashgam/errors.hpp"
#include "rashgam/gam.hpp"
#include "rashgam/rset_fit.hpp"

using namespace rashgam;
using testutil::random_spd;
using testutil::random_vec;

namespace {

// Loss depends on the first coordinate only.
class FlatObjective final : public Objective {
 public:
  std::size_t dim() const override { return 2; }
  double value(const Vec& w) const override { return w(0) * w(0); }
  Vec gradient(const Vec& w) const override { return Vec::Unit(2, 0) * 2 * w(0); }
  Mat hessian(const Vec&) const override { return Mat::Zero(2, 2); }
};

// Width of {t : L(w + (t - w_j) e_j) <= theta} for a quadratic loss.
double analytic_width(const QuadraticObjective& q, const Vec& w, Eigen::Index j, double theta) {
  const Vec r = w - q.minimizer();
  const double a = q.M()(j, j);
  const double b = 2 * q.M().row(j).dot(r);
  const double c = q.offset() + r.dot(q.M() * r) - theta;
  const double disc = b * b - 4 * a * c;
  return disc > 0 ? std::sqrt(disc) / a : 0.0;
}

}  // namespace

TEST_CASE("get_bounds crosses the threshold") {
  const QuadraticObjective q(Mat::Identity(1, 1), Vec::Ones(1), 0.0);
  const Vec w = Vec::Ones(1);
  const double right = get_bounds(q, w, 0, 0.25, 0.1, Side::Right);
  CHECK(right > 1.5);
  CHECK(q.value(Vec::Constant(1, right)) > 0.25);
  const double left = get_bounds(q, w, 0, 0.25, 0.1, Side::Left);
  CHECK(left == doctest::Approx(2.0 - right));
  CHECK_THROWS_AS(get_bounds(FlatObjective(), Vec::Zero(2), 1, 1.0, 0.1, Side::Right), NumericalError);
  CHECK_THROWS_AS(get_bounds(q, w, 0, 0.25, 0.0, Side::Right), SpecError);
  CHECK_THROWS_AS(get_bounds(q, w, 3, 0.25, 0.1, Side::Right), DimensionError);
}

TEST_CASE("segment_ends on a quadratic") {
  const QuadraticObjective q(Mat::Identity(1, 1), Vec::Ones(1), 0.0);
  const CoordInterval iv = segment_ends(q, Vec::Ones(1), 0, 0.25, 1e-6);
  CHECK(std::abs(iv.left - 0.5) <= 1e-6);
  CHECK(std::abs(iv.right - 1.5) <= 1e-6);
  CHECK(iv.width() >= 0.0);

  Vec at(1);
  at << 1.5;
  const CoordInterval deg = segment_ends(q, Vec::Ones(1), 0, 0.0, 1e-6);
  CHECK(deg.width() <= 2e-6);
  CHECK_THROWS_AS(segment_ends(q, at * 2, 0, 0.25), SpecError);
}

TEST_CASE("segment_ends on a logistic toy matches a grid scan") {
  Rng rng(21);
  Vec truth(3);
  truth << 0.2, -0.5, 0.6;
  const auto data = testutil::synthetic_binned({2}, 300, truth, rng);
  const GamObjective obj = GamObjective::for_support(data, Support::full(data), 0.01, 0.0);
  const Vec w = newton_minimize(data, 0.01, {});
  const double theta = obj.value(w) * 1.02;
  const double delta = 1e-4;
  for (std::size_t j = 0; j < 3; ++j) {
    const CoordInterval iv = segment_ends(obj, w, j, theta, delta);
    const double step = 1e-5;
    double lo = INFINITY;
    double hi = -INFINITY;
    Vec x = w;
    for (double t = w(static_cast<Eigen::Index>(j)) - 3; t <= w(static_cast<Eigen::Index>(j)) + 3; t += step) {
      x(static_cast<Eigen::Index>(j)) = t;
      if (obj.value(x) <= theta) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    }
    CHECK(std::abs(iv.left - lo) <= delta + step);
    CHECK(std::abs(iv.right - hi) <= delta + step);
  }
}

TEST_CASE("box volume of a separable quadratic") {
  const Vec a = Vec::LinSpaced(4, -1, 1);
  const QuadraticObjective q(Mat::Identity(4, 4), a, 0.5);
  const BoxVolume b = box_volume(q, a, 1.5, 1e-7);
  REQUIRE(b.intervals.size() == 4);
  for (const auto& iv : b.intervals) CHECK(iv.width() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(b.volume() == doctest::Approx(16.0).epsilon(1e-5));
  CHECK(b.log_volume == doctest::Approx(4 * std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("box widths match the fixed-others ellipsoid extent on a quadratic") {
  Rng rng(22);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat M = random_spd(5, rng);
    const Vec a = random_vec(5, rng);
    const QuadraticObjective q(M, a, 0.0);
    const Ellipsoid e = hessian_init(q, a, 1.0);
    const BoxVolume b = box_volume(q, a, 1.0, 1e-8);
    for (Eigen::Index j = 0; j < 5; ++j) {
      const double w = b.intervals[static_cast<std::size_t>(j)].width();
      CHECK(w == doctest::Approx(2.0 / std::sqrt(e.Q()(j, j))).epsilon(1e-6));
      CHECK(w == doctest::Approx(analytic_width(q, a, j, 1.0)).epsilon(1e-6));
    }
  }
}

TEST_CASE("bracketing center search") {
  const Vec a = Vec::LinSpaced(3, 0.5, 1.5);
  const QuadraticObjective sep(Mat::Identity(3, 3), a, 0.0);
  const BoxSearchResult r = bracketing_center_search(sep, a + Vec::Constant(3, 0.3), 1.0, 1e-8);
  CHECK((r.point - a).norm() < 1e-4);
  CHECK(r.box.volume() == doctest::Approx(8.0).epsilon(1e-4));
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);

  // Correlated 2-d quadratic against a brute-force grid.
  Mat M(2, 2);
  M << 2.0, 0.9, 0.9, 1.0;
  const Vec c = Vec::Zero(2);
  const QuadraticObjective cor(M, c, 0.0);
  Vec start(2);
  start << 0.3, -0.4;
  const BoxSearchResult s = bracketing_center_search(cor, start, 1.0, 1e-8, 20);
  double grid_best = 0.0;
  const int n = 400;
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k <= n; ++k) {
      Vec w(2);
      w << -1.0 + 2.0 * i / n, -1.5 + 3.0 * k / n;
      if (cor.value(w) > 1.0) continue;
      grid_best = std::max(grid_best, analytic_width(cor, w, 0, 1.0) * analytic_width(cor, w, 1, 1.0));
    }
  CHECK(std::abs(s.box.volume() / grid_best - 1.0) <= 0.05);
  for (std::size_t i = 1; i < s.history.size(); ++i) CHECK(s.history[i] >= s.history[i - 1]);
}
