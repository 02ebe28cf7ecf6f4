#include "rashgam/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "rashgam/errors.hpp"
#include "rashgam/parallel.hpp"

namespace rashgam {

PrecisionEstimate make_precision(std::size_t inside, std::size_t n) {
  PrecisionEstimate p;
  p.n_samples = n;
  p.n_inside = inside;
  if (n == 0) return p;
  p.precision = static_cast<double>(inside) / static_cast<double>(n);
  p.half_width = 1.96 * std::sqrt(p.precision * (1.0 - p.precision) / static_cast<double>(n));
  return p;
}

PrecisionEstimate estimate_precision(const Ellipsoid& e, const Objective& loss, double theta, std::size_t n_samples,
                                     Rng& rng) {
  if (n_samples == 0) throw SpecError("estimate_precision: n_samples must be >= 1");
  if (loss.dim() != e.dim()) throw DimensionError("estimate_precision: loss and ellipsoid dimensions differ");
  const Mat pts = e.sample(rng, n_samples);
  std::vector<char> in(n_samples, 0);
  parallel_for(n_samples, [&](std::size_t b, std::size_t end) {
    for (std::size_t i = b; i < end; ++i) in[i] = loss.value(pts.col(static_cast<Eigen::Index>(i))) <= theta;
  });
  const auto inside = static_cast<std::size_t>(std::count(in.begin(), in.end(), 1));
  return make_precision(inside, n_samples);
}

double recall_proxy(double precision, double log_vol_e, double log_vol_true) {
  if (!std::isfinite(log_vol_e) || !std::isfinite(log_vol_true)) throw SpecError("recall_proxy: volumes must be finite");
  return precision * std::exp(log_vol_e - log_vol_true);
}

std::string to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::Optimized: return "optimized";
    case BaselineKind::HessianInit: return "hessian_init";
    case BaselineKind::Sphere: return "sphere";
    case BaselineKind::BootstrapMvee: return "bootstrap_mvee";
  }
  return "unknown";
}

Ellipsoid sphere_baseline(const Vec& center, double target_log_volume) {
  const auto d = static_cast<double>(center.size());
  // log vol(cI) = log B_d - (d/2) log c
  const double c = std::exp(2.0 * (unit_ball_log_volume(center.size()) - target_log_volume) / d);
  return Ellipsoid(c * Mat::Identity(center.size(), center.size()), center);
}

std::vector<Vec> bootstrap_models(const BinnedDataset& data, const Support& support, std::size_t n_boot,
                                  double lambda2, Rng& rng, const ErmOptions& erm) {
  if (n_boot < support.size() + 2) throw SpecError("bootstrap_models: need at least d + 1 resamples");
  const BinnedDataset collapsed = collapse(data, support);
  const Vec warm = newton_minimize(collapsed, lambda2, erm);
  const std::uint64_t root = rng();
  const std::size_t n = data.n();
  std::vector<Vec> out(n_boot);
  parallel_for(n_boot, [&](std::size_t b, std::size_t end) {
    std::vector<std::size_t> rows(n);
    for (std::size_t r = b; r < end; ++r) {
      Rng local = fork_stream(root, r);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& i : rows) i = pick(local);
      const BinnedDataset boot = collapsed.subset(rows);
      try {
        out[r] = newton_minimize(boot, lambda2, erm, warm);
      } catch (const ConvergenceError& ex) {
        out[r] = ex.last_iterate();
      }
    }
  });
  return out;
}

namespace {

struct Adam {
  double lr, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Vec m, v;
  int t = 0;
  explicit Adam(double rate, Eigen::Index n) : lr(rate), m(Vec::Zero(n)), v(Vec::Zero(n)) {}
  void step(Vec& x, const Vec& g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g.cwiseAbs2();
    const double c1 = 1 - std::pow(b1, t);
    const double c2 = 1 - std::pow(b2, t);
    x.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

MveeResult mvee_fit(const Mat& samples, const MveeOptions& opt) {
  const Eigen::Index N = samples.rows();
  const Eigen::Index d = samples.cols();
  if (d == 0 || N < 1) throw SpecError("mvee_fit: no samples");
  const Vec mean = samples.colwise().mean();
  const Mat centered = samples.rowwise() - mean.transpose();
  Mat cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(N - 1, 1));
  MveeResult res{Ellipsoid(Mat::Identity(d, d), mean), 0.0, false};
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  const double top = es.eigenvalues().maxCoeff();
  if (!(es.eigenvalues().minCoeff() > 1e-12 * std::max(top, 0.0)) || !(top > 0)) {
    cov += 1e-8 * Mat::Identity(d, d);
    es.compute(cov);
    res.ridge_added = true;
  }
  // ZCA whitening W = Sigma^{-1/2}
  const Mat W = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
  const Mat W_inv = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const Mat Z = centered * W;  // whitened rows (W symmetric)

  // Parameters: center c (d), then lower factor L (row-major lower triangle, log diagonal).
  const Eigen::Index nl = d * (d + 1) / 2;
  Vec x = Vec::Zero(d + nl);
  // Start from the whitened ball that just covers every point.
  const double rmax = std::max(Z.rowwise().norm().maxCoeff(), 1e-12);
  for (Eigen::Index i = 0, k = d; i < d; k += i + 2, ++i) x(k) = -std::log(rmax);
  auto unpack = [&](const Vec& p, Vec& c, Mat& L) {
    c = p.head(d);
    L = Mat::Zero(d, d);
    Eigen::Index k = d;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j <= i; ++j, ++k) L(i, j) = i == j ? std::exp(p(k)) : p(k);
  };
  auto eval = [&](const Vec& p, Vec* grad) {
    Vec c;
    Mat L;
    unpack(p, c, L);
    const double s = L.diagonal().array().log().sum();
    const double vol = std::exp(s / static_cast<double>(d));
    double pen = 0.0;
    Vec gc = Vec::Zero(d);
    Mat gL = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < N; ++i) {
      const Vec r = Z.row(i).transpose() - c;
      const Vec v = L.transpose() * r;
      const double q = v.squaredNorm();
      if (q > 1.0) {
        pen += q - 1.0;
        if (grad) {
          gc -= 2.0 * (L * v);
          gL += 2.0 * r * v.transpose();
        }
      }
    }
    const double scale = opt.C / static_cast<double>(N);
    if (grad) {
      grad->resize(p.size());
      grad->head(d) = scale * gc;
      Eigen::Index k = d;
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j <= i; ++j, ++k) {
          double g = scale * gL(i, j);
          if (i == j) g = g * L(i, i) - vol / static_cast<double>(d);
          (*grad)(k) = g;
        }
    }
    return -vol + scale * pen;
  };

  Adam adam(opt.learning_rate, x.size());
  Vec best = x;
  double best_f = eval(x, nullptr);
  Vec g;
  for (int it = 0; it < opt.iterations; ++it) {
    // Linear decay to 1% of the initial rate.
    adam.lr = opt.learning_rate * (1.0 - 0.99 * it / std::max(1, opt.iterations - 1));
    eval(x, &g);
    adam.step(x, g);
    const double f = eval(x, nullptr);
    if (f < best_f) {
      best_f = f;
      best = x;
    }
  }
  Vec c;
  Mat L;
  unpack(best, c, L);
  const Mat Qz = L * L.transpose();
  Mat Q = W * Qz * W;
  Q = 0.5 * (Q + Q.transpose()).eval();
  const Vec center = mean + W_inv * c;
  res.ellipsoid = Ellipsoid(Q, center);
  std::size_t covered = 0;
  for (Eigen::Index i = 0; i < N; ++i) covered += res.ellipsoid.contains(samples.row(i).transpose()).inside;
  res.covered = static_cast<double>(covered) / static_cast<double>(N);
  return res;
}

std::vector<TradeoffPoint> tradeoff_curve(const Ellipsoid& e, const Objective& loss, double theta,
                                          const std::vector<double>& ratios, std::size_t n_samples,
                                          std::uint64_t seed) {
  std::vector<TradeoffPoint> out;
  out.reserve(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0)) throw SpecError("tradeoff_curve: ratios must be positive");
    Rng rng = fork_stream(seed, i);
    out.push_back({ratios[i], estimate_precision(e.rescaled(ratios[i]), loss, theta, n_samples, rng)});
  }
  return out;
}

double accuracy(const BinnedDataset& data, const Vec& w) {
  const Vec z = margins(data, w);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < data.n(); ++i) hit += (z(static_cast<Eigen::Index>(i)) > 0) == (data.labels()[i] == 1);
  return static_cast<double>(hit) / static_cast<double>(data.n());
}

double auc(const BinnedDataset& data, const Vec& w) {
  const Vec z = margins(data, w);
  const std::size_t n = data.n();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return z(static_cast<Eigen::Index>(a)) < z(static_cast<Eigen::Index>(b));
  });
  // Mann-Whitney with midranks.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && z(static_cast<Eigen::Index>(order[j])) == z(static_cast<Eigen::Index>(order[i]))) ++j;
    const double mid = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k)
      if (data.labels()[order[k]] == 1) {
        rank_sum += mid;
        ++pos;
      }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw DataError("auc: need both classes");
  const auto P = static_cast<double>(pos);
  return (rank_sum - P * (P + 1) / 2.0) / (P * static_cast<double>(neg));
}

std::vector<BaselineRow> baseline_comparison(const BinnedDataset& data, const Support& support,
                                             const RashomonConfig& cfg, std::size_t n_samples, std::size_t bootstrap,
                                             std::uint64_t seed, std::optional<RashomonFit>* fit_out) {
  Rng fit_rng = fork_stream(seed, 0);
  RashomonFit fit = approximate(data, support, cfg, fit_rng);
  const GamObjective obj = GamObjective::for_support(data, support, cfg.lambda2, cfg.lambda_s);
  const double target = fit.ellipsoid.log_volume();

  std::vector<std::pair<BaselineKind, Ellipsoid>> cells;
  cells.emplace_back(BaselineKind::Optimized, fit.ellipsoid);
  cells.emplace_back(BaselineKind::HessianInit, fit.initial.rescaled(fit.initial.scale_for_log_volume(target)));
  cells.emplace_back(BaselineKind::Sphere, sphere_baseline(fit.erm.packed(), target));
  if (bootstrap > 0) {
    Rng boot_rng = fork_stream(seed, 1);
    const auto models = bootstrap_models(data, support, bootstrap, cfg.lambda2, boot_rng, cfg.erm);
    Mat rows(static_cast<Eigen::Index>(models.size()), models.front().size());
    for (std::size_t i = 0; i < models.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = models[i].transpose();
    const Ellipsoid m = mvee_fit(rows).ellipsoid;
    cells.emplace_back(BaselineKind::BootstrapMvee, m.rescaled(m.scale_for_log_volume(target)));
  }
  std::vector<BaselineRow> out;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    Rng rng = fork_stream(seed, 10 + k);
    out.push_back({cells[k].first, cells[k].second.log_volume(),
                   estimate_precision(cells[k].second, obj, fit.theta, n_samples, rng)});
  }
  if (fit_out) *fit_out = std::move(fit);
  return out;
}

RatioReport method_ratio_report(const BinnedDataset& data, const Support& parent, std::size_t K_tilde,
                                std::size_t n_plans, const RashomonConfig& cfg, std::size_t n_precision,
                                std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  const BlockLayout layout = BlockLayout::from_support(parent);
  RatioReport rep;
  rep.K = layout.coefficients();
  rep.K_tilde = K_tilde;
  if (K_tilde > rep.K || K_tilde < layout.features()) throw SpecError("method_ratio_report: K_tilde out of range");

  const GamModel erm = fit_erm(data, parent, cfg.lambda2, cfg.lambda_s, cfg.erm);
  const GamObjective parent_obj = GamObjective::for_support(data, parent, cfg.lambda2, cfg.lambda_s);
  rep.loss_star_parent = parent_obj.value(erm.packed());
  rep.delta = cfg.theta_mult * rep.loss_star_parent;
  rep.theta_parent = rep.delta + cfg.lambda_s * static_cast<double>(rep.K - K_tilde);

  RashomonConfig pcfg = cfg;
  pcfg.theta = rep.theta_parent;
  Rng prng = fork_stream(seed, 0);
  const RashomonFit pfit = approximate(parent_obj, erm.packed(), pcfg, prng);

  Rng plan_rng = fork_stream(seed, 1);
  const auto plans = enumerate_plans(layout, K_tilde, n_plans, plan_rng);

  RashomonConfig rcfg = cfg;
  rcfg.theta = rep.delta;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    RatioRow row;
    row.plan = plans[i];
    const auto t0 = clock::now();
    const SlicedRashomon slice = intersect(pfit.ellipsoid, plans[i].groups(layout), rep.delta);
    row.time2 = std::chrono::duration<double>(clock::now() - t0).count();
    if (slice.empty()) {
      row.skipped = true;
      row.reason = "empty_slice";
      rep.rows.push_back(std::move(row));
      continue;
    }
    const Support reduced = plans[i].apply(parent);
    Rng rng1 = fork_stream(seed, 100 + 3 * i);
    std::optional<RashomonFit> fit1;
    const auto t1 = clock::now();
    try {
      fit1 = approximate(data, reduced, rcfg, rng1);
    } catch (const EmptyRashomonSetError&) {
      row.skipped = true;
      row.reason = "method1_empty";
    }
    row.time1 = std::chrono::duration<double>(clock::now() - t1).count();
    if (!fit1) {
      rep.rows.push_back(std::move(row));
      continue;
    }
    const GamObjective robj = GamObjective::for_support(data, reduced, cfg.lambda2, cfg.lambda_s);
    Rng r1 = fork_stream(seed, 101 + 3 * i);
    Rng r2 = fork_stream(seed, 102 + 3 * i);
    row.precision1 = estimate_precision(fit1->ellipsoid, robj, rep.delta, n_precision, r1).precision;
    row.precision2 = estimate_precision(*slice.ellipsoid, robj, rep.delta, n_precision, r2).precision;
    row.precision_ratio = row.precision1 / row.precision2;
    row.volume_ratio =
        std::exp((fit1->ellipsoid.log_volume() - slice.ellipsoid->log_volume()) / static_cast<double>(K_tilde));
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace rashgam
