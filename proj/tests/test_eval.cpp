#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rashgam/errors.hpp"
#include "rashgam/eval.hpp"

using namespace rashgam;
using testutil::random_spd;
using testutil::random_vec;

TEST_CASE("precision of an exact ellipsoid is one") {
  Rng rng(41);
  const Mat M = random_spd(3, rng);
  const Vec a = random_vec(3, rng);
  const QuadraticObjective obj(M, a, 0.5);
  const Ellipsoid truth(M / 0.5, a);
  const PrecisionEstimate p = estimate_precision(truth, obj, 1.0, 5000, rng);
  CHECK(p.n_samples == 5000);
  CHECK(p.n_inside == 5000);
  CHECK(p.precision == 1.0);
  CHECK(p.half_width == 0.0);

  // Inflating every axis by 10 keeps 10^-d of the volume inside.
  const PrecisionEstimate big = estimate_precision(truth.rescaled(10.0), obj, 1.0, 200000, rng);
  CHECK(std::abs(big.precision - 1e-3) <= 3 * std::sqrt(1e-3 * (1 - 1e-3) / 200000.0));

  const PrecisionEstimate m = make_precision(30, 100);
  CHECK(m.precision == doctest::Approx(0.3));
  CHECK(m.half_width == doctest::Approx(1.96 * std::sqrt(0.3 * 0.7 / 100)));
  CHECK(make_precision(0, 0).precision == 0.0);
}

TEST_CASE("recall proxy") {
  CHECK(recall_proxy(0.9, std::log(2.0), std::log(1.0)) == doctest::Approx(1.8));
  CHECK(recall_proxy(1.0, 0.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("sphere baseline hits the target volume") {
  Rng rng(42);
  const Vec c = random_vec(6, rng);
  const Ellipsoid s = sphere_baseline(c, -3.7);
  CHECK(s.log_volume() == doctest::Approx(-3.7).epsilon(1e-12));
  CHECK((s.center() - c).norm() == 0.0);
  CHECK((s.Q() - s.Q()(0, 0) * Mat::Identity(6, 6)).norm() == 0.0);
  CHECK(to_string(BaselineKind::BootstrapMvee) == "bootstrap_mvee");
  CHECK(to_string(BaselineKind::Optimized) == "optimized");
}

TEST_CASE("mvee recovers a known ellipsoid from boundary samples") {
  Rng rng(43);
  for (int d : {2, 3, 4}) {
    const Mat Q = random_spd(d, rng, 0.5);
    const Ellipsoid truth(Q, random_vec(d, rng));
    std::normal_distribution<double> N;
    Mat pts(400, d);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      Vec y(d);
      for (Eigen::Index t = 0; t < d; ++t) y(t) = N(rng);
      pts.row(i) = (truth.inv_sqrt() * y.normalized() + truth.center()).transpose();
    }
    const MveeResult r = mvee_fit(pts);
    CHECK_FALSE(r.ridge_added);
    CHECK(r.covered >= 0.99);
    const double ratio = std::exp(r.ellipsoid.log_volume() - truth.log_volume());
    CHECK(std::abs(ratio - 1.0) <= 0.05);
  }
}

TEST_CASE("mvee on degenerate samples adds a ridge") {
  Mat pts = Mat::Zero(20, 3);
  for (Eigen::Index i = 0; i < 20; ++i) pts(i, 0) = static_cast<double>(i % 5);
  const MveeResult r = mvee_fit(pts, {1000.0, 0.01, 50});
  CHECK(r.ridge_added);
  CHECK(std::isfinite(r.ellipsoid.log_volume()));
  Mat same = Mat::Ones(10, 2);
  CHECK(mvee_fit(same, {1000.0, 0.01, 20}).ridge_added);
  CHECK_THROWS_AS(mvee_fit(Mat::Zero(0, 2)), SpecError);
}

TEST_CASE("tradeoff curve is monotone in the scale") {
  Rng rng(44);
  const Mat M = random_spd(3, rng);
  const QuadraticObjective obj(M, Vec::Zero(3), 0.0);
  const Ellipsoid e(M, Vec::Zero(3));
  const auto curve = tradeoff_curve(e, obj, 1.0, {0.5, 1.0, 1.5, 2.0, 3.0}, 20000, 7);
  REQUIRE(curve.size() == 5);
  CHECK(curve[0].precision.precision == 1.0);
  CHECK(curve[1].precision.precision == 1.0);
  for (std::size_t i = 2; i < curve.size(); ++i) {
    CHECK(curve[i].precision.precision < curve[i - 1].precision.precision);
    const double expect = std::pow(curve[i].rho, -3.0);
    CHECK(std::abs(curve[i].precision.precision - expect) <= 4 * std::sqrt(expect * (1 - expect) / 20000));
  }
  const auto again = tradeoff_curve(e, obj, 1.0, {0.5, 1.0, 1.5, 2.0, 3.0}, 20000, 7);
  for (std::size_t i = 0; i < curve.size(); ++i)
    CHECK(again[i].precision.n_inside == curve[i].precision.n_inside);
}

TEST_CASE("accuracy and AUC") {
  Rng rng(45);
  const auto data = testutil::synthetic_binned({3, 2}, 300, random_vec(6, rng), rng);
  const Vec w = random_vec(6, rng);
  // Brute force over all positive/negative pairs.
  std::vector<double> pos;
  std::vector<double> neg;
  int correct = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double z = w(0);
    for (std::size_t j = 0; j < data.p(); ++j) z += w(static_cast<Eigen::Index>(1 + data.column(i, j)));
    const int y = data.labels()[i];
    (y ? pos : neg).push_back(z);
    correct += (z > 0) == (y == 1);
  }
  double wins = 0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  CHECK(auc(data, w) == doctest::Approx(wins / (pos.size() * neg.size())).epsilon(1e-12));
  CHECK(accuracy(data, w) == doctest::Approx(static_cast<double>(correct) / data.n()).epsilon(1e-12));
  CHECK(auc(data, Vec::Zero(6)) == doctest::Approx(0.5));
}

TEST_CASE("bootstrap spread shrinks with the sample size") {
  Rng rng(46);
  Vec truth(6);
  truth << -0.2, 0.5, -0.5, 0.0, 0.8, -0.8;
  auto spread = [&](std::size_t n) {
    Rng r(100 + n);
    const auto data = testutil::synthetic_binned({3, 2}, n, truth, r);
    const auto boots = bootstrap_models(data, Support::full(data), 40, 0.01, r);
    REQUIRE(boots.size() == 40);
    Vec mean = Vec::Zero(6);
    for (const auto& b : boots) mean += b / 40.0;
    double var = 0.0;
    for (const auto& b : boots) var += (b - mean).squaredNorm() / 39.0;
    return std::sqrt(var);
  };
  const double small = spread(400);
  const double large = spread(6400);
  CHECK(large < 0.5 * small);

  const auto data = testutil::synthetic_binned({3, 2}, 200, truth, rng);
  CHECK_THROWS_AS(bootstrap_models(data, Support::full(data), 3, 0.01, rng), SpecError);
  Rng a(9);
  Rng b(9);
  const auto x = bootstrap_models(data, Support::full(data), 10, 0.01, a);
  const auto y = bootstrap_models(data, Support::full(data), 10, 0.01, b);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK((x[i] - y[i]).norm() == 0.0);
}

TEST_CASE("baseline comparison ordering on a small problem") {
  Rng rng(47);
  const auto data = testutil::synthetic_binned({3, 3}, 1000, random_vec(7, rng, 0.6), rng);
  RashomonConfig cfg;
  cfg.iterations = 300;
  std::optional<RashomonFit> fit;
  const auto rows = baseline_comparison(data, Support::full(data), cfg, 4000, 0, 3, &fit);
  REQUIRE(rows.size() == 3);
  REQUIRE(fit);
  CHECK(rows[0].kind == BaselineKind::Optimized);
  for (const auto& r : rows) CHECK(r.log_volume == doctest::Approx(rows[0].log_volume).epsilon(1e-9));
  CHECK(rows[0].precision.precision >= rows[2].precision.precision);
  CHECK(rows[1].precision.precision >= rows[2].precision.precision);
}

TEST_CASE("method ratio report") {
  Rng rng(48);
  Vec truth(9);
  truth << 0.0, -1.0, 0.0, 0.0, 1.0, 0.5, 0.5, -0.5, -0.5;
  const auto data = testutil::synthetic_binned({4, 4}, 2000, truth, rng);
  RashomonConfig cfg;
  cfg.iterations = 200;
  const RatioReport rep = method_ratio_report(data, Support::full(data), 7, 4, cfg, 2000, 11);
  CHECK(rep.K == 8);
  CHECK(rep.K_tilde == 7);
  CHECK(rep.rows.size() == 4);
  CHECK(rep.theta_parent == doctest::Approx(rep.delta + cfg.lambda_s));
  CHECK(rep.delta == doctest::Approx(cfg.theta_mult * rep.loss_star_parent));
  for (const auto& r : rep.rows) {
    CHECK(r.plan.merges() == 1);
    if (r.skipped) continue;
    CHECK(r.precision_ratio > 0);
    CHECK(r.volume_ratio > 0);
    CHECK(r.time2 < r.time1);
  }
}
