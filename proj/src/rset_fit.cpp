#include "rashgam/rset_fit.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rashgam/errors.hpp"
#include "rashgam/parallel.hpp"

namespace rashgam {

namespace {

struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vec m_c, v_c;
  Mat m_l, v_l;
  int t = 0;

  Adam(double lr_, std::size_t d) : lr(lr_) {
    const auto n = static_cast<Eigen::Index>(d);
    m_c = v_c = Vec::Zero(n);
    m_l = v_l = Mat::Zero(n, n);
  }

  void step(Vec& c, Mat& l, const Vec& gc, const Mat& gl) {
    ++t;
    const double b1 = 1.0 - std::pow(beta1, t);
    const double b2 = 1.0 - std::pow(beta2, t);
    m_c = beta1 * m_c + (1 - beta1) * gc;
    v_c = beta2 * v_c + (1 - beta2) * gc.cwiseAbs2();
    m_l = beta1 * m_l + (1 - beta1) * gl;
    v_l = beta2 * v_l + (1 - beta2) * gl.cwiseAbs2();
    c.array() -= lr * (m_c.array() / b1) / ((v_c.array() / b2).sqrt() + eps);
    l.array() -= lr * (m_l.array() / b1) / ((v_l.array() / b2).sqrt() + eps);
  }
};

// Raw parameters keep log L_ii on the diagonal.
Mat factor_from_raw(const Mat& raw) {
  Mat l = raw.triangularView<Eigen::StrictlyLower>();
  l.diagonal() = raw.diagonal().array().exp().matrix();
  return l;
}

Mat raw_from_factor(const Mat& l) {
  Mat raw = l.triangularView<Eigen::StrictlyLower>();
  raw.diagonal() = l.diagonal().array().log().matrix();
  return raw;
}

// Rebuilds the factor from clamped eigenvalues when Q has drifted toward
// singularity. Returns true when a repair happened.
bool repair_conditioning(Mat& raw) {
  const Mat l = factor_from_raw(raw);
  const Mat q = l * l.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin > 1e-11 * lmax && raw.allFinite()) return false;
  const Vec clamped = es.eigenvalues().cwiseMax(1e-10 * lmax);
  const Mat fixed = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  const Eigen::LLT<Mat> llt(0.5 * (fixed + fixed.transpose()));
  if (llt.info() != Eigen::Success) throw NumericalError("rset optimize: cannot repair ellipsoid factor");
  raw = raw_from_factor(llt.matrixL());
  return true;
}

}  // namespace

double RashomonConfig::resolve_theta(double loss_star) const {
  return std::isnan(theta) ? theta_mult * loss_star : theta;
}

void RashomonConfig::validate() const {
  if (std::isnan(theta) && !(theta_mult > 1.0)) throw SpecError("theta multiplier must be > 1");
  if (!(C > 0)) throw SpecError("C must be positive");
  if (!(learning_rate > 0)) throw SpecError("learning rate must be positive");
  if (iterations < 0) throw SpecError("iterations must be >= 0");
  if (samples_per_iter < 1 || checkpoint_samples < 1 || checkpoint_every < 1) {
    throw SpecError("sample counts and checkpoint interval must be >= 1");
  }
  if (lambda2 < 0 || lambda_s < 0) throw SpecError("penalty weights must be non-negative");
}

void FitTrace::write_csv(std::ostream& out) const {
  out << "iter,objective,log_volume,overflow_mean,outside_frac\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.iter << ',' << r.objective << ',' << r.log_volume << ',' << r.overflow_mean << ',' << r.outside_frac
        << '\n';
  }
}

Ellipsoid hessian_init(const Objective& objective, const Vec& erm, double theta) {
  const double loss_star = objective.value(erm);
  if (!(theta > loss_star)) {
    throw EmptyRashomonSetError("empty Rashomon set under quadratic model: theta " + std::to_string(theta) +
                                " <= L(w*) " + std::to_string(loss_star));
  }
  Mat h = objective.hessian(erm);
  return Ellipsoid(h / (2.0 * (theta - loss_star)), erm, Provenance{theta, NAN, NAN, loss_star});
}

PenaltyGradient penalty_gradient(const Vec& center, const Mat& factor, const Objective& objective, double theta,
                                 const Mat& ball_points) {
  const auto d = center.size();
  const auto n = static_cast<std::size_t>(ball_points.cols());
  std::vector<double> overflow(n, 0.0);
  Mat zs(d, static_cast<Eigen::Index>(n));
  Mat hs = Mat::Zero(d, static_cast<Eigen::Index>(n));
  Mat gs = Mat::Zero(d, static_cast<Eigen::Index>(n));
  const auto lower = factor.triangularView<Eigen::Lower>();

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      const Vec z = lower.transpose().solve(ball_points.col(col));
      zs.col(col) = z;
      const Vec w = center + z;
      const double v = objective.value(w);
      if (v > theta) {
        overflow[i] = v - theta;
        const Vec g = objective.gradient(w);
        gs.col(col) = g;
        hs.col(col) = lower.solve(g);
      }
    }
  });

  PenaltyGradient out;
  out.d_center = Vec::Zero(d);
  out.d_factor = Mat::Zero(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    if (overflow[i] == 0.0) continue;
    const auto col = static_cast<Eigen::Index>(i);
    out.d_center += gs.col(col);
    out.d_factor.noalias() -= zs.col(col) * hs.col(col).transpose();
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.value = pairwise_sum(overflow) * inv;
  out.outside_frac = static_cast<double>(std::count_if(overflow.begin(), overflow.end(), [](double o) { return o > 0.0; })) * inv;
  out.d_center *= inv;
  out.d_factor = (out.d_factor * inv).triangularView<Eigen::Lower>();
  return out;
}

PenaltyEstimate evaluate_objective(const Ellipsoid& e, const Objective& objective, double theta, double C,
                                   const Mat& ball_points) {
  const auto n = static_cast<std::size_t>(ball_points.cols());
  std::vector<double> overflow(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vec w = e.inv_sqrt() * ball_points.col(static_cast<Eigen::Index>(i)) + e.center();
      overflow[i] = std::max(objective.value(w) - theta, 0.0);
    }
  });
  PenaltyEstimate out;
  std::size_t outside = 0;
  for (double o : overflow) outside += o > 0.0 ? 1 : 0;
  out.overflow_mean = pairwise_sum(overflow) / static_cast<double>(n);
  out.outside_frac = static_cast<double>(outside) / static_cast<double>(n);
  const double vol_term = std::exp(e.eigen().lambda.array().log().sum() / (2.0 * static_cast<double>(e.dim())));
  out.objective = vol_term + C * out.overflow_mean;
  return out;
}

OptimizeResult optimize(const Ellipsoid& init, const Objective& objective, double theta, const RashomonConfig& cfg,
                        Rng& rng) {
  cfg.validate();
  if (init.dim() != objective.dim()) throw DimensionError("optimize: ellipsoid and objective dimensions differ");
  const std::size_t d = init.dim();
  const double dd = static_cast<double>(d);

  const Eigen::LLT<Mat> llt(init.Q());
  if (llt.info() != Eigen::Success) throw NumericalError("optimize: initial Q is not positive definite");
  Vec c = init.center();
  Mat raw = raw_from_factor(llt.matrixL());

  // Fixed pool for checkpoint estimates, so checkpoints are comparable.
  Mat pool(static_cast<Eigen::Index>(d), cfg.checkpoint_samples);
  for (int i = 0; i < cfg.checkpoint_samples; ++i) pool.col(i) = sample_unit_ball(d, rng);

  FitTrace trace;
  trace.rows.reserve(static_cast<std::size_t>(cfg.iterations));
  Provenance prov = init.provenance();
  prov.theta = theta;

  auto current = [&]() {
    const Mat l = factor_from_raw(raw);
    Mat q = l * l.transpose();
    return Ellipsoid(0.5 * (q + q.transpose()), c, prov);
  };

  Ellipsoid best = init.with_provenance(prov);
  double best_obj = evaluate_objective(best, objective, theta, cfg.C, pool).objective;
  trace.checkpoints.push_back({0, best_obj, best_obj});
  trace.best_iter = 0;

  Adam adam(cfg.learning_rate, d);
  Mat ys(static_cast<Eigen::Index>(d), cfg.samples_per_iter);
  const double log_ball = unit_ball_log_volume(d);

  for (int it = 1; it <= cfg.iterations; ++it) {
    for (int s = 0; s < cfg.samples_per_iter; ++s) ys.col(s) = sample_unit_ball(d, rng);
    const Mat l = factor_from_raw(raw);
    const PenaltyGradient pg = penalty_gradient(c, l, objective, theta, ys);

    const double sum_s = raw.diagonal().sum();
    const double vol_term = std::exp(sum_s / dd);
    Vec gc = cfg.C * pg.d_center;
    Mat gl = cfg.C * pg.d_factor;
    // Chain rule onto log-diagonal entries, plus d/ds_i of exp(sum s / d).
    gl.diagonal() = gl.diagonal().cwiseProduct(l.diagonal()).array() + vol_term / dd;

    FitTrace::Row row;
    row.iter = it;
    row.overflow_mean = pg.value;
    row.outside_frac = pg.outside_frac;
    row.log_volume = log_ball - sum_s;
    row.objective = vol_term + cfg.C * pg.value;
    trace.rows.push_back(row);

    adam.step(c, raw, gc, gl);
    if (!c.allFinite() || !raw.allFinite()) throw NumericalError("optimize: parameters diverged");

    if (it % cfg.checkpoint_every == 0 || it == cfg.iterations) {
      if (repair_conditioning(raw)) ++trace.spd_repairs;
      const Ellipsoid e = current();
      const double obj = evaluate_objective(e, objective, theta, cfg.C, pool).objective;
      if (obj < best_obj) {
        best_obj = obj;
        best = e;
        trace.best_iter = it;
      }
      trace.checkpoints.push_back({it, obj, best_obj});
    }
  }
  Provenance final_prov = prov;
  final_prov.loss_at_center = objective.value(best.center());
  return {best.with_provenance(final_prov), std::move(trace)};
}

RashomonFit approximate(const Objective& objective, const Vec& minimizer, const RashomonConfig& cfg, Rng& rng) {
  cfg.validate();
  const double loss_star = objective.value(minimizer);
  const double theta = cfg.resolve_theta(loss_star);
  Ellipsoid init = hessian_init(objective, minimizer, theta);
  Provenance prov{theta, cfg.lambda2, cfg.lambda_s, loss_star};
  init = init.with_provenance(prov);
  auto opt = optimize(init, objective, theta, cfg, rng);
  Provenance final_prov = prov;
  final_prov.loss_at_center = opt.ellipsoid.provenance().loss_at_center;
  return RashomonFit{GamModel{}, loss_star, theta, init, opt.ellipsoid.with_provenance(final_prov),
                     std::move(opt.trace)};
}

RashomonFit approximate(const BinnedDataset& data, const Support& support, const RashomonConfig& cfg, Rng& rng) {
  cfg.validate();
  GamModel erm = fit_erm(data, support, cfg.lambda2, cfg.lambda_s, cfg.erm);
  const GamObjective objective = GamObjective::for_support(data, support, cfg.lambda2, cfg.lambda_s);
  RashomonFit fit = approximate(objective, erm.packed(), cfg, rng);
  fit.erm = std::move(erm);
  return fit;
}

}  // namespace rashgam
