// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "oracles.hpp"
#include "rashgam/apps.hpp"
#include "rashgam/blocking.hpp"
#include "rashgam/box_oracle.hpp"
#include "rashgam/dataset.hpp"
#include "rashgam/eval.hpp"
#include "rashgam/gam.hpp"
#include "rashgam/objective.hpp"
#include "rashgam/rset_fit.hpp"

using namespace rashgam;
using testutil::random_spd;
using testutil::random_vec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BinnedDataset diabetes(int bins) {
  const RawDataset raw = read_csv(RASHGAM_DATA);
  return bin(raw, make_quantile_spec(raw, bins));
}

// Number of quantile bins per feature used for the Diabetes checks.
constexpr int kDiabetesBins = 8;

// 1. Method 1 on a quadratic loss whose sublevel set is known exactly.
Outcome quadratic_fidelity() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const int d = 4;
  const Mat M = random_spd(d, rng);
  const Vec a = random_vec(d, rng);
  const QuadraticObjective obj(M, a, 1.0);
  RashomonConfig cfg;
  cfg.theta_mult = 1.5;  // theta = 1.5: the true set is (w - a)^T M (w - a) <= 0.5
  cfg.learning_rate = 1e-3;
  Rng fit_rng(102);
  const RashomonFit fit = approximate(obj, a, cfg, fit_rng);
  const Ellipsoid truth(M / 0.5, a);
  Rng prng(103);
  const PrecisionEstimate p = estimate_precision(fit.ellipsoid, obj, fit.theta, 100000, prng);
  const double recall = recall_proxy(p.precision, fit.ellipsoid.log_volume(), truth.log_volume());
  const double outside = 1.0 - p.precision;
  const double t = seconds_since(t0);
  return {recall >= 0.95 && outside <= 0.01 && t < 60.0,
          fmt("recovered volume %.4f (>= 0.95), outside %.4f (<= 0.01), %.2f s (< 60)", recall, outside, t)};
}

// 2. Baseline ordering on Diabetes at equal volume.
Outcome baseline_ordering() {
  const auto t0 = Clock::now();
  const BinnedDataset data = diabetes(kDiabetesBins);
  RashomonConfig cfg;
  cfg.lambda2 = 0.001;
  cfg.lambda_s = 0.001;
  cfg.theta_mult = 1.01;
  const auto rows = baseline_comparison(data, Support::full(data), cfg, 10000, 0, 2024);
  const auto& opt = rows[0].precision;
  const auto& hes = rows[1].precision;
  const auto& sph = rows[2].precision;
  const double slack1 = opt.precision - hes.precision + 2 * std::max(opt.half_width, hes.half_width);
  const double slack2 = hes.precision - sph.precision + 2 * std::max(hes.half_width, sph.half_width);
  const double t = seconds_since(t0);
  return {slack1 >= 0 && slack2 >= 0 && t < 600.0,
          fmt("optimized %.4f >= hessian %.4f >= sphere %.4f (half-widths %.4f/%.4f/%.4f), %.1f s (< 600)",
              opt.precision, hes.precision, sph.precision, opt.half_width, hes.half_width, sph.half_width, t)};
}

// 3. Sampled models keep the ERM's test accuracy and AUC.
Outcome test_band() {
  const BinnedDataset all = diabetes(kDiabetesBins);
  std::vector<std::size_t> idx(all.n());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng split(301);
  std::shuffle(idx.begin(), idx.end(), split);
  const std::size_t n_train = all.n() * 4 / 5;
  std::vector<std::size_t> tr(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> te(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());
  const BinnedDataset train = all.subset(tr);
  const BinnedDataset test = all.subset(te);

  RashomonConfig cfg;
  cfg.theta_mult = 1.01;
  const Support s = Support::full(train);
  Rng rng(302);
  const RashomonFit fit = approximate(train, s, cfg, rng);
  const BinnedDataset test_c = collapse(test, s);
  const Vec w_erm = fit.erm.packed();
  const double acc_erm = accuracy(test_c, w_erm);
  const double auc_erm = auc(test_c, w_erm);
  const int n = 1000;
  double acc = 0.0;
  double au = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec w = fit.ellipsoid.sample(rng);
    acc += accuracy(test_c, w) / n;
    au += auc(test_c, w) / n;
  }
  const double da = std::abs(acc - acc_erm);
  const double du = std::abs(au - auc_erm);
  return {da <= 0.03 && du <= 0.02, fmt("test accuracy %.4f vs ERM %.4f (|diff| %.4f <= 0.03), AUC %.4f vs %.4f "
                                        "(|diff| %.4f <= 0.02)",
                                        acc, acc_erm, da, au, auc_erm, du)};
}

// 4. Method 2 slices against Method 1 refits on merged supports.
Outcome blocking_equivalence() {
  Rng rng(401);
  Vec truth(21);
  // Four features with five bins each; adjacent plateaus make merges cheap.
  truth << -0.3,                         //
      -0.8, -0.8, 0.0, 0.5, 0.5,         //
      0.6, 0.2, 0.2, -0.4, -0.9,         //
      -0.5, -0.5, -0.5, 0.4, 1.0,        //
      0.3, 0.0, -0.3, -0.3, 0.6;
  const auto data = testutil::synthetic_binned({5, 5, 5, 5}, 5000, truth, rng);
  RashomonConfig cfg;
  cfg.C = 3000;
  cfg.learning_rate = 1e-3;
  cfg.iterations = 2500;
  const RatioReport rep = method_ratio_report(data, Support::full(data), 18, 50, cfg, 10000, 402);
  std::vector<double> pr;
  std::vector<double> vr;
  double t1 = 0.0;
  double t2 = 0.0;
  for (const auto& r : rep.rows) {
    if (r.skipped) continue;
    pr.push_back(r.precision_ratio);
    vr.push_back(r.volume_ratio);
    t1 += r.time1;
    t2 += r.time2;
  }
  const double n = static_cast<double>(pr.size());
  const double mp = median(pr);
  const double mv = median(vr);
  t1 /= n;
  t2 /= n;
  const bool ok = pr.size() >= 25 && mp >= 0.9 && mp <= 1.1 && mv >= 0.85 && mv <= 1.3 && t2 < 1e-3 && t1 >= 1.0;
  return {ok, fmt("K=%zu K~=%zu, %zu/%zu plans nonempty; median precision ratio %.3f in [0.9,1.1], median volume "
                  "ratio %.3f in [0.85,1.3]; Method 2 %.2e s (< 1e-3), Method 1 %.2f s (>= 1)",
                  rep.K, rep.K_tilde, pr.size(), rep.rows.size(), mp, mv, t2, t1)};
}

// 5. Merge algebra against the explicit substitution matrix.
Outcome block_algebra() {
  Rng rng(501);
  double worst = 0.0;
  int mismatches = 0;
  int empties = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t d = 4 + static_cast<std::size_t>(rep % 9);
    const Mat Q = random_spd(static_cast<Eigen::Index>(d), rng);
    const Vec c = random_vec(static_cast<Eigen::Index>(d), rng, rep % 2 ? 0.2 : 1.0);
    std::vector<CoordRange> groups;
    std::uniform_int_distribution<int> len(0, 3);
    for (std::size_t i = 1; i < d;) {
      const auto l = static_cast<std::size_t>(len(rng));
      if (l > 0 && i + l < d) {
        groups.emplace_back(i, i + l);
        i += l + 1;
      } else {
        ++i;
      }
    }
    const auto map = reduction_map(d, groups);
    const std::size_t r = *std::max_element(map.begin(), map.end()) + 1;
    Mat A = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(r));
    for (std::size_t i = 0; i < d; ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(map[i])) = 1.0;
    const Mat QA = A.transpose() * Q * A;
    const Vec lA = A.transpose() * (Q * c);
    const Vec cA = QA.ldlt().solve(lA);
    const double uA = 1.0 - c.dot(Q * c) + cA.dot(QA * cA);
    const SlicedRashomon s = intersect(Ellipsoid(Q, c), groups, 0.0);
    auto rel = [](const auto& x, const auto& y) { return (x - y).norm() / std::max(1.0, y.norm()); };
    worst = std::max({worst, rel(merge_quadratic(Q, groups), QA), rel(merge_linear(Q * c, groups), lA),
                      rel(s.center, cA), std::abs(s.u - uA) / std::max(1.0, std::abs(uA))});
    if (!s.empty()) worst = std::max(worst, rel(s.ellipsoid->Q(), Mat(QA / uA)));
    mismatches += s.empty() != (uA <= 0.0);
    empties += uA <= 0.0;
  }
  return {worst <= 1e-9 && mismatches == 0,
          fmt("1000 instances, max relative error %.2e (<= 1e-9), classification mismatches %d (%d empty)", worst,
              mismatches, empties)};
}

// 6. KKT and sampling oracles for projection, monotone fitting and VI.
Outcome application_kkt() {
  Rng rng(601);
  double proj_kkt = 0.0;
  double proj_boundary = 0.0;
  int proj_beaten = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Ellipsoid e(random_spd(5, rng), random_vec(5, rng));
    Vec req = random_vec(5, rng);
    if (e.quad_form(req) <= 1.0) req = e.center() + 3.0 * (req - e.center()) / std::sqrt(e.quad_form(req));
    const ProjectionResult p = project_edit(e, req);
    proj_kkt = std::max(proj_kkt, testutil::projection_kkt(e, p, req));
    proj_boundary = std::max(proj_boundary, std::abs(e.quad_form(p.omega) - 1.0));
    const Mat cand = e.sample(rng, 100000);
    for (Eigen::Index i = 0; i < cand.cols(); ++i) proj_beaten += (cand.col(i) - req).norm() < p.distance - 1e-12;
  }

  double mono_kkt = 0.0;
  int mono_beaten = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Ellipsoid e(random_spd(6, rng), random_vec(6, rng));
    const Direction dir = rep % 2 ? Direction::Increasing : Direction::Decreasing;
    FeatureRef f;
    f.offset = 1 + static_cast<std::size_t>(rep % 2);
    f.weights = Vec::Constant(4, 0.25);
    const std::vector<MonotoneConstraint> cons{{f, dir}};
    std::vector<std::pair<std::size_t, double>> fixes;
    if (rep % 3 == 0) fixes.emplace_back(0, e.center()(0) + 0.1);
    const MonotoneResult r = monotone_fit(e, cons, fixes);
    mono_kkt = std::max(mono_kkt, testutil::monotone_kkt(e, r, cons, fixes).worst());
    for (int s = 0; s < 100000; ++s) {
      Vec w = testutil::project_monotone(e.center() + random_vec(6, rng, 0.5), f.offset, 4, dir);
      for (const auto& [i, v] : fixes) w(static_cast<Eigen::Index>(i)) = v;
      mono_beaten += e.quad_form(w) < r.q - 1e-12;
    }
  }

  double vi_gap = 0.0;
  int vi_violations = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + rep % 3;
    const Ellipsoid e(random_spd(d, rng), random_vec(d, rng, rep % 2 ? 0.3 : 1.5));
    FeatureRef f;
    f.offset = d == 2 ? 0 : 1;
    f.weights = Vec::Constant(static_cast<Eigen::Index>(d - f.offset), 1.0 / static_cast<double>(d - f.offset));
    const ViBound lo = vi_lower(e, f, ViMode::Free);
    const ViBound hi = vi_upper(e, f, ViMode::Free);
    const auto s = testutil::sample_vi(e, f, 1000000, rng);
    vi_violations += lo.value > s.min + 1e-9;
    vi_violations += hi.value < s.max - 1e-9;
    vi_gap = std::max({vi_gap, s.min - lo.value, hi.value - s.max});
  }

  const bool ok = proj_kkt <= 1e-8 && proj_boundary <= 1e-8 && proj_beaten == 0 && mono_kkt <= 1e-8 &&
                  mono_beaten == 0 && vi_violations == 0 && vi_gap <= 1e-2;
  return {ok, fmt("project: KKT %.1e, |q-1| %.1e, beaten %d/1e7; monotone: KKT %.1e, beaten %d/1e7; VI: bracket "
                  "violations %d, max gap to sampling %.2e (<= 1e-2)",
                  proj_kkt, proj_boundary, proj_beaten, mono_kkt, mono_beaten, vi_violations, vi_gap)};
}

// 7. Analytic derivatives of the GAM objective against central differences.
Outcome derivatives() {
  Rng rng(701);
  double g_err = 0.0;
  double h_err = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::vector<int> bins{2 + rep % 3, 3, 2 + rep % 2};
    const int m = std::accumulate(bins.begin(), bins.end(), 0);
    const auto data = testutil::synthetic_binned(bins, 150, random_vec(m + 1, rng, 0.7), rng);
    const GamObjective obj(data, 0.05, 0.01, 3);
    const Vec w = random_vec(m + 1, rng, 0.5);
    const Vec g = obj.gradient(w);
    const Mat H = obj.hessian(w);
    Vec fd_g(m + 1);
    Mat fd_h(m + 1, m + 1);
    for (int i = 0; i <= m; ++i) {
      const double hg = 1e-5;
      Vec e = Vec::Zero(m + 1);
      e(i) = hg;
      fd_g(i) = (obj.value(w + e) - obj.value(w - e)) / (2 * hg);
      e(i) = 1e-5;
      fd_h.col(i) = (obj.gradient(w + e) - obj.gradient(w - e)) / (2 * 1e-5);
    }
    g_err = std::max(g_err, (fd_g - g).norm() / g.norm());
    h_err = std::max(h_err, (fd_h - H).norm() / H.norm());
  }
  return {g_err <= 1e-6 && h_err <= 1e-5,
          fmt("50 instances, gradient rel. error %.2e (<= 1e-6), Hessian rel. error %.2e (<= 1e-5)", g_err, h_err)};
}

// 8. Bisection box at the fitted center contains the ellipsoid's axis segments.
Outcome box_cross_check() {
  const BinnedDataset data = diabetes(kDiabetesBins);
  RashomonConfig cfg;
  cfg.theta_mult = 1.01;
  const Support s = Support::full(data);
  Rng rng(801);
  const RashomonFit fit = approximate(data, s, cfg, rng);
  const GamObjective obj = GamObjective::for_support(data, s, cfg.lambda2, cfg.lambda_s);
  const Ellipsoid& e = fit.ellipsoid;
  const Vec& c = e.center();
  if (obj.value(c) > fit.theta) return {false, "fitted center lies outside the Rashomon set"};
  const BoxVolume box = box_volume(obj, c, fit.theta, 1e-8);
  int violations = 0;
  double worst = INFINITY;
  for (const auto& iv : box.intervals) {
    const auto j = static_cast<Eigen::Index>(iv.j);
    const double half = 1.0 / std::sqrt(e.Q()(j, j));
    const double margin = std::min((c(j) - half) - iv.left, iv.right - (c(j) + half));
    worst = std::min(worst, margin);
    violations += margin < -1e-8;
  }
  return {violations == 0, fmt("%zu coordinates, %d segments poke out of the box, smallest margin %.3e",
                               box.intervals.size(), violations, worst)};
}

// 9. Radial law of the uniform sampler.
Outcome sampler_law() {
  Rng rng(901);
  std::string detail;
  bool ok = true;
  for (int d : {2, 5, 10}) {
    const Ellipsoid e(random_spd(d, rng), random_vec(d, rng));
    const int n = 100000;
    int inner = 0;
    const Mat pts = e.sample(rng, n);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) inner += e.quad_form(pts.col(i)) <= 0.25;
    const double p = std::pow(0.5, d);
    const double sigma = std::sqrt(p * (1 - p) / n);
    const double frac = static_cast<double>(inner) / n;
    const double z = (frac - p) / sigma;
    ok = ok && std::abs(z) <= 3.0;
    detail += fmt("d=%d %.5f vs %.5f (z %.2f) ", d, frac, p, z);
  }
  return {ok, detail + "(|z| <= 3)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"quadratic-oracle fidelity", quadratic_fidelity},
      {"baseline ordering (Diabetes)", baseline_ordering},
      {"test-performance band (Diabetes 80/20)", test_band},
      {"blocking equivalence", blocking_equivalence},
      {"block-algebra oracle", block_algebra},
      {"application KKT suite", application_kkt},
      {"derivative suite", derivatives},
      {"box-oracle cross-check (Diabetes)", box_cross_check},
      {"sampler law", sampler_law},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, checks[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
