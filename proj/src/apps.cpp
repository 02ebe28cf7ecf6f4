#include "rashgam/apps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

#include "rashgam/errors.hpp"

namespace rashgam {

FeatureRef FeatureRef::of(const BinnedDataset& collapsed, std::size_t j) {
  const auto& b = collapsed.block(j);
  FeatureRef f;
  f.offset = 1 + b.offset;
  f.weights = collapsed.pi().segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size));
  return f;
}

FeatureRef FeatureRef::of(const GamModel& model, std::size_t j) {
  const Support& s = model.support;
  if (j >= s.features()) throw SpecError("feature index out of range");
  std::size_t coord = 1;
  std::size_t bin = 0;
  for (std::size_t f = 0; f < j; ++f) {
    coord += s.runs(f).size();
    for (auto len : s.runs(f)) bin += len;
  }
  FeatureRef out;
  out.offset = coord;
  out.weights.resize(static_cast<Eigen::Index>(s.runs(j).size()));
  for (std::size_t r = 0; r < s.runs(j).size(); ++r) {
    const std::size_t len = s.runs(j)[r];
    out.weights(static_cast<Eigen::Index>(r)) =
        model.pi.segment(static_cast<Eigen::Index>(bin), static_cast<Eigen::Index>(len)).sum();
    bin += len;
  }
  return out;
}

double vi_point(const Vec& w, const FeatureRef& f) {
  if (f.offset + f.size() > static_cast<std::size_t>(w.size())) throw DimensionError("vi: feature outside vector");
  return f.weights.dot(w.segment(static_cast<Eigen::Index>(f.offset), static_cast<Eigen::Index>(f.size())).cwiseAbs());
}

namespace {

void check_feature(const Ellipsoid& e, const FeatureRef& f) {
  if (f.size() == 0) throw SpecError("feature has no coefficients");
  if (f.offset + f.size() > e.dim()) throw DimensionError("feature block outside ellipsoid coordinates");
}

// The feature block's own ellipsoid plus the map back to full coordinates.
// Free mode: the projection of e onto the block (shape ((Q^{-1})_BB)^{-1}),
// lifted through the conditional center. Fixed mode: the slice with all other
// coordinates (intercept included) held at the center.
struct BlockProblem {
  std::optional<Ellipsoid> block;
  std::function<Vec(const Vec&)> lift;
};

BlockProblem block_problem(const Ellipsoid& e, const FeatureRef& f, ViMode mode) {
  const auto off = static_cast<Eigen::Index>(f.offset);
  const auto b = static_cast<Eigen::Index>(f.size());
  BlockProblem bp;
  if (mode == ViMode::FixOthers) {
    std::vector<std::pair<std::size_t, double>> fixed;
    for (std::size_t i = 0; i < e.dim(); ++i) {
      if (i < f.offset || i >= f.offset + f.size()) fixed.emplace_back(i, e.center()(static_cast<Eigen::Index>(i)));
    }
    Slice s = e.slice_fix_coords(fixed);
    if (s.empty()) throw EmptyRashomonSetError("center-slice infeasible");
    bp.block = s.ellipsoid();
    bp.lift = [s](const Vec& x) { return s.lift(x); };
  } else {
    const Mat p = e.inverse().block(off, off, b, b);
    Mat s = p.inverse();
    s = 0.5 * (s + s.transpose()).eval();
    bp.block = Ellipsoid(s, e.center().segment(off, b));
    bp.lift = [&e, f](const Vec& x) {
      std::vector<std::pair<std::size_t, double>> fixed;
      for (std::size_t k = 0; k < f.size(); ++k) fixed.emplace_back(f.offset + k, x(static_cast<Eigen::Index>(k)));
      return e.slice_fix_coords(fixed).anchor;
    };
  }
  return bp;
}

// min sum w_k |x_k| over {(x-c)^T S (x-c) <= 1} when 0 is outside: follow the
// weighted-lasso path min sum w|x| + (lam/2) q(x) and bisect on lam until the
// constraint is active.
Vec lasso_path_min(const Ellipsoid& eb, const Vec& w) {
  const Mat& S = eb.Q();
  const Vec& c = eb.center();
  const auto n = c.size();
  Vec x = c;
  auto solve = [&](double lam) {
    for (int sweep = 0; sweep < 100000; ++sweep) {
      double change = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double r = S.row(k).dot(x - c) - S(k, k) * (x(k) - c(k));
        const double z = c(k) - r / S(k, k);
        const double t = w(k) / (lam * S(k, k));
        const double nx = z > t ? z - t : (z < -t ? z + t : 0.0);
        change = std::max(change, std::abs(nx - x(k)));
        x(k) = nx;
      }
      if (change <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff())) break;
    }
    const Vec r = x - c;
    return r.dot(S * r);
  };
  double lo = 1.0;
  double hi = 1.0;
  while (solve(lo) <= 1.0 && lo > 1e-300) lo *= 0.1;
  while (solve(hi) > 1.0 && hi < 1e300) hi *= 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (solve(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo - 1.0 < 1e-15) break;
  }
  solve(hi);
  return x;
}

}  // namespace

ViBound vi_lower(const Ellipsoid& e, const FeatureRef& f, ViMode mode, const ViOptions& opt) {
  check_feature(e, f);
  // Zero block feasible -> 0.
  {
    std::vector<std::pair<std::size_t, double>> fixed;
    for (std::size_t k = 0; k < f.size(); ++k) fixed.emplace_back(f.offset + k, 0.0);
    if (mode == ViMode::FixOthers) {
      for (std::size_t i = 0; i < e.dim(); ++i)
        if (i < f.offset || i >= f.offset + f.size()) fixed.emplace_back(i, e.center()(static_cast<Eigen::Index>(i)));
    }
    const Slice s = e.slice_fix_coords(fixed);
    if (s.level >= 0.0) return {0.0, s.anchor};
  }

  const BlockProblem bp = block_problem(e, f, mode);
  const Ellipsoid& eb = *bp.block;
  const Vec& w = f.weights;
  const auto b = static_cast<Eigen::Index>(f.size());

  if (f.size() <= opt.max_lower_bins) {
    // A pattern whose linear minimizer has matching signs is globally optimal:
    // (w.s)^T x <= sum w|x| everywhere, with equality at that minimizer.
    auto try_pattern = [&](const Vec& s) -> std::optional<ViBound> {
      const LinearMin lm = eb.minimize_linear(w.cwiseProduct(s));
      for (Eigen::Index k = 0; k < b; ++k) {
        if (s(k) * lm.point(k) < 0.0) return std::nullopt;
      }
      return ViBound{w.dot(lm.point.cwiseAbs()), bp.lift(lm.point)};
    };
    Vec s(b);
    for (Eigen::Index k = 0; k < b; ++k) s(k) = eb.center()(k) < 0 ? -1.0 : 1.0;
    if (auto r = try_pattern(s)) return *r;
    const std::uint64_t total = std::uint64_t{1} << f.size();
    s.setOnes();
    for (std::uint64_t i = 0; i < total; ++i) {
      if (i > 0) s(std::countr_zero(i)) *= -1.0;
      if (auto r = try_pattern(s)) return *r;
    }
  }
  // No sign-consistent pattern: the optimum has zero coordinates.
  const Vec x = lasso_path_min(eb, w);
  return {w.dot(x.cwiseAbs()), bp.lift(x)};
}

ViBound vi_upper(const Ellipsoid& e, const FeatureRef& f, ViMode mode, const ViOptions& opt) {
  check_feature(e, f);
  if (f.size() > opt.max_upper_bins) {
    throw EnumerationLimitError("feature has " + std::to_string(f.size()) + " coefficients; sign enumeration is capped at " +
                                std::to_string(opt.max_upper_bins) + ". Use fix_others or coarser bins.");
  }
  const BlockProblem bp = block_problem(e, f, mode);
  const Ellipsoid& eb = *bp.block;
  const Mat p = eb.inverse();
  const Vec& c = eb.center();
  const Vec& w = f.weights;
  const auto b = static_cast<Eigen::Index>(f.size());

  // Gray-code walk over s in {-1,+1}^B; value(s) = (w.s)^T c + sqrt(u^T P u), u = w.s.
  Vec u = w;
  Vec pu = p * u;
  double lin = u.dot(c);
  double quad = u.dot(pu);
  std::vector<signed char> s(static_cast<std::size_t>(b), 1);
  std::vector<signed char> best_s = s;
  double best = lin + std::sqrt(std::max(quad, 0.0));
  const std::uint64_t total = std::uint64_t{1} << f.size();
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto k = static_cast<Eigen::Index>(std::countr_zero(i));
    const double uk = u(k);
    quad += -4.0 * uk * pu(k) + 4.0 * uk * uk * p(k, k);
    pu -= 2.0 * uk * p.col(k);
    lin -= 2.0 * uk * c(k);
    u(k) = -uk;
    s[static_cast<std::size_t>(k)] = static_cast<signed char>(-s[static_cast<std::size_t>(k)]);
    const double v = lin + std::sqrt(std::max(quad, 0.0));
    if (v > best || (v == best && s < best_s)) {
      best = v;
      best_s = s;
    }
  }
  Vec sv(b);
  for (Eigen::Index k = 0; k < b; ++k) sv(k) = best_s[static_cast<std::size_t>(k)];
  const LinearMin lm = eb.minimize_linear(-w.cwiseProduct(sv));
  return {w.dot(lm.point.cwiseAbs()), bp.lift(lm.point)};
}

VariableImportanceRange vi_range(const Ellipsoid& e, const FeatureRef& f, std::size_t feature, ViMode mode,
                                 const ViOptions& opt) {
  VariableImportanceRange r;
  r.feature = feature;
  r.mode = mode;
  r.vi_center = vi_point(e.center(), f);
  ViBound lo = vi_lower(e, f, mode, opt);
  ViBound hi = vi_upper(e, f, mode, opt);
  r.vi_minus = lo.value;
  r.vi_plus = hi.value;
  r.argmin = std::move(lo.point);
  r.argmax = std::move(hi.point);
  return r;
}

// ---------------------------------------------------------------------------
// Monotone projection

namespace {

struct OrderBlock {
  std::size_t offset;
  std::size_t size;
  double sigma;  // +1 increasing, -1 decreasing; constraint sigma (x_k - x_{k+1}) <= 0
};

}  // namespace

MonotoneResult monotone_fit(const Ellipsoid& e, const std::vector<MonotoneConstraint>& constraints,
                            const std::vector<std::pair<std::size_t, double>>& fixes) {
  const std::size_t d = e.dim();
  const Mat& Q = e.Q();
  const Vec& c = e.center();

  std::vector<OrderBlock> blocks;
  std::vector<int> owner(d, -1);
  for (const auto& mc : constraints) {
    if (mc.feature.size() == 0 || mc.feature.offset + mc.feature.size() > d) {
      throw DimensionError("monotone: feature block outside ellipsoid coordinates");
    }
    for (std::size_t k = 0; k < mc.feature.size(); ++k) {
      if (owner[mc.feature.offset + k] >= 0) throw SpecError("monotone: constraints overlap");
      owner[mc.feature.offset + k] = static_cast<int>(blocks.size());
    }
    blocks.push_back({mc.feature.offset, mc.feature.size(), mc.direction == Direction::Increasing ? 1.0 : -1.0});
  }

  MonotoneResult res;
  res.multipliers.resize(blocks.size());
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) res.multipliers[bi] = Vec::Zero(static_cast<Eigen::Index>(blocks[bi].size - 1));
  res.fix_multipliers.assign(fixes.size(), 0.0);

  std::vector<std::optional<double>> fixed(d);
  for (const auto& [i, v] : fixes) {
    if (i >= d) throw DimensionError("monotone: fixed coordinate out of range");
    if (fixed[i] && *fixed[i] != v) {
      res.omega = c;
      res.q = std::numeric_limits<double>::infinity();
      return res;
    }
    fixed[i] = v;
  }

  // Feasible start and initial working set.
  Vec x = c;
  for (std::size_t i = 0; i < d; ++i)
    if (fixed[i]) x(static_cast<Eigen::Index>(i)) = *fixed[i];
  for (const auto& blk : blocks) {
    std::optional<double> prev;
    std::optional<double> first;
    for (std::size_t k = 0; k < blk.size; ++k) {
      const std::size_t i = blk.offset + k;
      if (fixed[i]) {
        if (prev && blk.sigma * (*prev - *fixed[i]) > 0) {
          res.omega = c;
          res.q = std::numeric_limits<double>::infinity();
          return res;
        }
        prev = fixed[i];
        if (!first) first = fixed[i];
      }
    }
    if (!first) {
      const double mean = c.segment(static_cast<Eigen::Index>(blk.offset), static_cast<Eigen::Index>(blk.size)).mean();
      x.segment(static_cast<Eigen::Index>(blk.offset), static_cast<Eigen::Index>(blk.size)).setConstant(mean);
      continue;
    }
    double fill = *first;
    for (std::size_t k = 0; k < blk.size; ++k) {
      const std::size_t i = blk.offset + k;
      if (fixed[i]) {
        fill = *fixed[i];
      } else {
        x(static_cast<Eigen::Index>(i)) = fill;
      }
    }
  }
  std::vector<std::vector<char>> active(blocks.size());
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& blk = blocks[bi];
    active[bi].assign(blk.size - 1, 0);
    for (std::size_t k = 0; k + 1 < blk.size; ++k) {
      const auto i = static_cast<Eigen::Index>(blk.offset + k);
      active[bi][k] = x(i) == x(i + 1) ? 1 : 0;
    }
  }

  // Minimizer over the affine set defined by the working set and fixes.
  auto solve_eqp = [&]() {
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> cls(d);
    std::iota(cls.begin(), cls.end(), std::size_t{0});
    for (std::size_t bi = 0; bi < blocks.size(); ++bi)
      for (std::size_t k = 0; k + 1 < blocks[bi].size; ++k)
        if (active[bi][k]) cls[blocks[bi].offset + k + 1] = cls[blocks[bi].offset + k];
    std::vector<std::optional<double>> cls_fixed(d);
    for (std::size_t i = 0; i < d; ++i)
      if (fixed[i]) cls_fixed[cls[i]] = fixed[i];
    std::vector<std::size_t> red(d, unset);
    std::size_t nfree = 0;
    for (std::size_t i = 0; i < d; ++i)
      if (!cls_fixed[cls[i]] && cls[i] == i) red[i] = nfree++;
    Vec base = Vec::Zero(static_cast<Eigen::Index>(d));
    std::vector<std::size_t> map(d, unset);
    for (std::size_t i = 0; i < d; ++i) {
      if (cls_fixed[cls[i]]) {
        base(static_cast<Eigen::Index>(i)) = *cls_fixed[cls[i]];
      } else {
        map[i] = red[cls[i]];
      }
    }
    Vec out = base;
    if (nfree == 0) return out;
    const auto nf = static_cast<Eigen::Index>(nfree);
    Mat qt = Mat::Zero(nf, nf);
    Vec rhs = Vec::Zero(nf);
    const Vec g = Q * (c - base);
    for (std::size_t i = 0; i < d; ++i) {
      if (map[i] == unset) continue;
      rhs(static_cast<Eigen::Index>(map[i])) += g(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < d; ++j) {
        if (map[j] == unset) continue;
        qt(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(map[j])) += Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    const Eigen::LLT<Mat> llt(qt);
    if (llt.info() != Eigen::Success) throw NumericalError("monotone: reduced quadratic is singular");
    const Vec v = llt.solve(rhs);
    for (std::size_t i = 0; i < d; ++i)
      if (map[i] != unset) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(map[i]));
    return out;
  };

  // Multipliers for the current working set at x (an EQP minimizer).
  // Returns (block, pair, value) of the most negative droppable multiplier.
  struct Drop {
    std::size_t block;
    std::size_t pair;
    double value;
  };
  auto compute_multipliers = [&](const Vec& xw) -> std::optional<Drop> {
    const Vec gamma = 2.0 * Q * (xw - c);
    std::optional<Drop> worst;
    const double tol = 1e-12 * (1.0 + gamma.cwiseAbs().maxCoeff());
    Vec residual = gamma;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& blk = blocks[bi];
      Vec& lam = res.multipliers[bi];
      lam.setZero();
      const double sg = blk.sigma;
      std::size_t a = 0;
      while (a < blk.size) {
        std::size_t b = a;
        while (b + 1 < blk.size && active[bi][b]) ++b;
        // Chain of coordinates a..b (local), pairs a..b-1 active.
        std::vector<std::size_t> fx;
        for (std::size_t k = a; k <= b; ++k)
          if (fixed[blk.offset + k]) fx.push_back(k);
        auto gam = [&](std::size_t k) { return gamma(static_cast<Eigen::Index>(blk.offset + k)); };
        const std::size_t left_end = fx.empty() ? b : fx.front();
        double acc = 0.0;
        for (std::size_t k = a; k < left_end; ++k) {
          acc += gam(k);
          lam(static_cast<Eigen::Index>(k)) = -sg * acc;
        }
        if (!fx.empty()) {
          acc = 0.0;
          for (std::size_t k = b; k > fx.back(); --k) {
            acc += gam(k);
            lam(static_cast<Eigen::Index>(k - 1)) = sg * acc;
          }
          for (std::size_t t = 0; t + 1 < fx.size(); ++t) {
            // Between two fixed coordinates: one free multiplier level, chosen
            // so every multiplier in the segment is non-negative.
            double partial = 0.0;
            double need = 0.0;
            for (std::size_t k = fx[t] + 1; k < fx[t + 1]; ++k) {
              partial += gam(k);
              need = std::max(need, sg * partial);
            }
            partial = 0.0;
            lam(static_cast<Eigen::Index>(fx[t])) = need;
            for (std::size_t k = fx[t] + 1; k < fx[t + 1]; ++k) {
              partial += gam(k);
              lam(static_cast<Eigen::Index>(k)) = need - sg * partial;
            }
          }
        }
        for (std::size_t k = a; k < b; ++k) {
          const bool droppable = fx.empty() || k < fx.front() || k >= fx.back();
          const double v = lam(static_cast<Eigen::Index>(k));
          if (droppable && v < -tol && (!worst || v < worst->value)) worst = Drop{bi, k, v};
        }
        a = b + 1;
      }
      for (std::size_t k = 0; k + 1 < blk.size; ++k) {
        const auto i = static_cast<Eigen::Index>(blk.offset + k);
        residual(i) += sg * lam(static_cast<Eigen::Index>(k));
        residual(i + 1) -= sg * lam(static_cast<Eigen::Index>(k));
      }
    }
    for (std::size_t f = 0; f < fixes.size(); ++f) res.fix_multipliers[f] = 0.0;
    for (std::size_t f = 0; f < fixes.size(); ++f) {
      // Duplicate fixes of one coordinate share the multiplier on the first.
      const std::size_t i = fixes[f].first;
      bool first = true;
      for (std::size_t g = 0; g < f; ++g) first = first && fixes[g].first != i;
      if (first) res.fix_multipliers[f] = -residual(static_cast<Eigen::Index>(i));
    }
    return worst;
  };

  std::size_t n_constraints = 0;
  for (const auto& blk : blocks) n_constraints += blk.size - 1;
  const int max_iter = static_cast<int>(50 * (n_constraints + 1) + 100);
  int it = 0;
  for (; it < max_iter; ++it) {
    const Vec xw = solve_eqp();
    const Vec p = xw - x;
    if (p.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + x.cwiseAbs().maxCoeff())) {
      x = xw;
      const auto drop = compute_multipliers(x);
      if (!drop) break;
      active[drop->block][drop->pair] = 0;
      continue;
    }
    double alpha = 1.0;
    std::optional<std::pair<std::size_t, std::size_t>> blocking;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& blk = blocks[bi];
      for (std::size_t k = 0; k + 1 < blk.size; ++k) {
        if (active[bi][k]) continue;
        const auto i = static_cast<Eigen::Index>(blk.offset + k);
        const double gp = blk.sigma * (p(i) - p(i + 1));
        if (gp <= 0) continue;
        const double slack = -blk.sigma * (x(i) - x(i + 1));
        const double a = std::max(slack, 0.0) / gp;
        if (a < alpha) {
          alpha = a;
          blocking = std::make_pair(bi, k);
        }
      }
    }
    if (!blocking) {
      x = xw;
    } else {
      x += alpha * p;
      const auto [bi, k] = *blocking;
      active[bi][k] = 1;
      const auto i = static_cast<Eigen::Index>(blocks[bi].offset + k);
      x(i + 1) = x(i);
    }
  }
  if (it == max_iter) throw NumericalError("monotone: active-set iteration limit reached");
  res.iterations = it;
  res.omega = x;
  res.q = e.quad_form(x);
  res.feasible = res.q <= 1.0;
  return res;
}

// ---------------------------------------------------------------------------

ProjectionResult project_edit(const Ellipsoid& e, const Vec& request) {
  ProjectionResult res;
  const double q0 = e.quad_form(request);
  if (q0 <= 1.0) {
    res.omega = request;
    res.inside_already = true;
    return res;
  }
  const EigenFactors& ef = e.eigen();
  const Vec y = ef.V.transpose() * (request - e.center());
  const Vec ly2 = ef.lambda.cwiseProduct(y.cwiseAbs2());
  auto q_of = [&](double mu) { return (ly2.array() / (1.0 + mu * ef.lambda.array()).square()).sum(); };
  auto dq_of = [&](double mu) {
    return (-2.0 * ly2.array() * ef.lambda.array() / (1.0 + mu * ef.lambda.array()).cube()).sum();
  };

  double lo = 0.0;
  double hi = 1.0 / ef.lambda(0);
  while (q_of(hi) > 1.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("project_edit: cannot bracket the multiplier");
  }
  // Newton on phi(mu) = q(mu)^{-1/2} - 1 (close to linear), bisection fallback.
  double mu = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double q = q_of(mu);
    if (q > 1.0) {
      lo = mu;
    } else {
      hi = mu;
    }
    if (std::abs(q - 1.0) <= 1e-15 || hi - lo <= 1e-17 * hi) break;
    const double phi = 1.0 / std::sqrt(q) - 1.0;
    const double dphi = -0.5 * std::pow(q, -1.5) * dq_of(mu);
    double next = dphi != 0.0 ? mu - phi / dphi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }
  // Feasible side of the bracket: Newton may stop just outside with a stale hi.
  if (q_of(mu) > 1.0) {
    lo = mu;
    for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (q_of(mid) > 1.0 ? lo : hi) = mid;
    }
    mu = hi;
  }
  res.mu = mu;
  const Vec z = y.array() / (1.0 + mu * ef.lambda.array());
  res.omega = e.center() + ef.V * z;
  res.distance = (res.omega - request).norm();
  return res;
}

JumpReport jump_analysis(const Ellipsoid& e, const FeatureRef& f, std::size_t feature, std::size_t boundary,
                         std::size_t n_samples, double tau, Rng& rng) {
  check_feature(e, f);
  if (n_samples < 1) throw SpecError("jump analysis needs at least one sample");
  if (boundary + 1 >= f.size()) throw SpecError("jump boundary must be below the last coefficient of the feature");
  if (!(tau >= 0)) throw SpecError("tau must be non-negative");
  JumpReport rep;
  rep.feature = feature;
  rep.boundary = boundary;
  rep.n_samples = n_samples;
  rep.tau = tau;
  const auto k = static_cast<Eigen::Index>(f.offset + boundary);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vec w = e.sample(rng);
    const double diff = w(k + 1) - w(k);
    if (diff < -tau) {
      ++rep.down;
    } else if (diff > tau) {
      ++rep.up;
    } else {
      ++rep.flat;
    }
  }
  return rep;
}

}  // namespace rashgam
