#include "rashgam/gam.hpp"

#include <cmath>
#include <limits>

#include "rashgam/parallel.hpp"

namespace rashgam {

namespace {

void check_dim(const BinnedDataset& data, const Vec& coef) {
  if (static_cast<std::size_t>(coef.size()) != data.dim()) {
    throw DimensionError("coefficient vector has length " + std::to_string(coef.size()) + ", expected " +
                         std::to_string(data.dim()));
  }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Support::Support(std::vector<std::vector<std::size_t>> run_lengths) : runs_(std::move(run_lengths)) {
  for (std::size_t j = 0; j < runs_.size(); ++j) {
    if (runs_[j].empty()) throw SpecError("support: feature " + std::to_string(j) + " has no runs");
    for (auto len : runs_[j])
      if (len == 0) throw SpecError("support: zero-length run in feature " + std::to_string(j));
  }
}

Support Support::full(const BinnedDataset& data) {
  std::vector<std::vector<std::size_t>> runs(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) runs[j].assign(data.block(j).size, 1);
  return Support(std::move(runs));
}

Support Support::from_coefficients(const BinnedDataset& data, const Vec& coef, double tol) {
  check_dim(data, coef);
  std::vector<std::vector<std::size_t>> runs(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) {
    const auto& b = data.block(j);
    std::size_t len = 1;
    for (std::size_t k = 1; k < b.size; ++k) {
      const auto c = static_cast<Eigen::Index>(1 + b.offset + k);
      if (std::abs(coef(c) - coef(c - 1)) <= tol) {
        ++len;
      } else {
        runs[j].push_back(len);
        len = 1;
      }
    }
    runs[j].push_back(len);
  }
  return Support(std::move(runs));
}

std::size_t Support::size() const {
  std::size_t k = 0;
  for (const auto& r : runs_) k += r.size();
  return k;
}

std::size_t Support::bins() const {
  std::size_t m = 0;
  for (const auto& r : runs_)
    for (auto len : r) m += len;
  return m;
}

long Support::steps() const {
  long s = 0;
  for (const auto& r : runs_) s += static_cast<long>(r.size()) - 1;
  return s;
}

void Support::validate(const BinnedDataset& data) const {
  if (runs_.size() != data.p()) throw DimensionError("support has wrong number of features");
  for (std::size_t j = 0; j < runs_.size(); ++j) {
    std::size_t total = 0;
    for (auto len : runs_[j]) total += len;
    if (total != data.block(j).size) {
      throw DimensionError("support runs of feature " + std::to_string(j) + " cover " + std::to_string(total) +
                           " bins, dataset has " + std::to_string(data.block(j).size));
    }
  }
}

BinnedDataset collapse(const BinnedDataset& data, const Support& support) {
  support.validate(data);
  std::vector<std::vector<double>> edges(data.p());
  std::vector<std::vector<int>> run_of_bin(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) {
    const auto& old_edges = data.edges()[j];
    std::size_t start = 0;
    edges[j].push_back(old_edges.front());
    for (std::size_t r = 0; r < support.runs(j).size(); ++r) {
      const auto len = support.runs(j)[r];
      for (std::size_t k = 0; k < len; ++k) run_of_bin[j].push_back(static_cast<int>(r));
      start += len;
      edges[j].push_back(old_edges[start]);
    }
  }
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> idx(data.bin_index().rows(), data.bin_index().cols());
  for (Eigen::Index i = 0; i < idx.rows(); ++i)
    for (Eigen::Index j = 0; j < idx.cols(); ++j)
      idx(i, j) = run_of_bin[static_cast<std::size_t>(j)][static_cast<std::size_t>(data.bin_index()(i, j))];
  return BinnedDataset(data.feature_names(), std::move(edges), std::move(idx), data.labels());
}

Vec expand(const Support& support, const Vec& packed) {
  if (static_cast<std::size_t>(packed.size()) != support.size() + 1) {
    throw DimensionError("expand: packed vector has wrong length");
  }
  Vec full(static_cast<Eigen::Index>(support.bins() + 1));
  full(0) = packed(0);
  Eigen::Index out = 1;
  Eigen::Index in = 1;
  for (std::size_t j = 0; j < support.features(); ++j) {
    for (auto len : support.runs(j)) {
      for (std::size_t k = 0; k < len; ++k) full(out++) = packed(in);
      ++in;
    }
  }
  return full;
}

Vec pack(const Support& support, const Vec& full) {
  if (static_cast<std::size_t>(full.size()) != support.bins() + 1) {
    throw DimensionError("pack: full vector has wrong length");
  }
  Vec packed(static_cast<Eigen::Index>(support.size() + 1));
  packed(0) = full(0);
  Eigen::Index out = 1;
  Eigen::Index in = 1;
  for (std::size_t j = 0; j < support.features(); ++j) {
    for (auto len : support.runs(j)) {
      packed(out++) = full(in);
      in += static_cast<Eigen::Index>(len);
    }
  }
  return packed;
}

Vec GamModel::coefficients() const {
  Vec c(omega.size() + 1);
  c(0) = intercept;
  c.tail(omega.size()) = omega;
  return c;
}

void GamModel::validate() const {
  if (support.bins() != m()) throw DimensionError("model: support does not cover omega");
  if (pi.size() != omega.size()) throw DimensionError("model: pi and omega lengths differ");
  if (bin_edges.size() != feature_names.size() || support.features() != feature_names.size()) {
    throw DimensionError("model: feature count mismatch");
  }
  std::size_t offset = 0;
  for (std::size_t j = 0; j < support.features(); ++j) {
    if (bin_edges[j].size() < 2) throw SpecError("model: feature without bins");
    std::size_t bins = 0;
    for (auto len : support.runs(j)) {
      for (std::size_t k = 1; k < len; ++k) {
        const auto c = static_cast<Eigen::Index>(offset + k);
        if (omega(c) != omega(c - 1)) throw SpecError("model: omega is not constant within a support run");
      }
      offset += len;
      bins += len;
    }
    if (bins != bin_edges[j].size() - 1) throw DimensionError("model: support disagrees with bin edges");
  }
}

Vec margins(const BinnedDataset& data, const Vec& coef) {
  check_dim(data, coef);
  Vec z(static_cast<Eigen::Index>(data.n()));
  const auto& idx = data.bin_index();
  for (std::size_t i = 0; i < data.n(); ++i) {
    double s = coef(0);
    for (std::size_t j = 0; j < data.p(); ++j) {
      s += coef(static_cast<Eigen::Index>(1 + data.block(j).offset) + idx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    z(static_cast<Eigen::Index>(i)) = s;
  }
  return z;
}

double classification_loss(const BinnedDataset& data, const Vec& coef) {
  const Vec z = margins(data, coef);
  std::vector<double> terms(data.n());
  parallel_for(data.n(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double sign = data.labels()[i] == 1 ? 1.0 : -1.0;
      terms[i] = softplus(-sign * z(static_cast<Eigen::Index>(i)));
    }
  });
  return pairwise_sum(terms) / static_cast<double>(data.n());
}

double penalty_l2(const BinnedDataset& data, const Vec& coef) {
  check_dim(data, coef);
  const auto w = coef.tail(static_cast<Eigen::Index>(data.m()));
  return (data.pi().array() * w.array().square()).sum();
}

long penalty_steps(const BinnedDataset& data, const Vec& coef) {
  check_dim(data, coef);
  long steps = 0;
  for (const auto& b : data.blocks()) {
    for (std::size_t k = 0; k + 1 < b.size; ++k) {
      const auto c = static_cast<Eigen::Index>(1 + b.offset + k);
      if (coef(c) != coef(c + 1)) ++steps;
    }
  }
  return steps;
}

LossBreakdown total_loss(const BinnedDataset& data, const Vec& coef, double lambda2, double lambda_s) {
  LossBreakdown out;
  out.classification = classification_loss(data, coef);
  out.l2 = penalty_l2(data, coef);
  out.steps = penalty_steps(data, coef);
  out.total = out.classification + lambda2 * out.l2 + lambda_s * static_cast<double>(out.steps);
  return out;
}

Vec gradient(const BinnedDataset& data, const Vec& coef, double lambda2) {
  const Vec z = margins(data, coef);
  Vec g = Vec::Zero(coef.size());
  const double inv_n = 1.0 / static_cast<double>(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double r = (sigmoid(z(static_cast<Eigen::Index>(i))) - data.labels()[i]) * inv_n;
    g(0) += r;
    for (std::size_t j = 0; j < data.p(); ++j) g(static_cast<Eigen::Index>(1 + data.column(i, j))) += r;
  }
  g.tail(static_cast<Eigen::Index>(data.m())).array() +=
      2.0 * lambda2 * data.pi().array() * coef.tail(static_cast<Eigen::Index>(data.m())).array();
  return g;
}

Mat hessian(const BinnedDataset& data, const Vec& coef, double lambda2) {
  const Vec z = margins(data, coef);
  const auto d = static_cast<Eigen::Index>(data.dim());
  Mat h = Mat::Zero(d, d);
  const double inv_n = 1.0 / static_cast<double>(data.n());
  std::vector<Eigen::Index> cols(data.p() + 1);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double p = sigmoid(z(static_cast<Eigen::Index>(i)));
    const double s = p * (1.0 - p) * inv_n;
    cols[0] = 0;
    for (std::size_t j = 0; j < data.p(); ++j) cols[j + 1] = static_cast<Eigen::Index>(1 + data.column(i, j));
    for (std::size_t a = 0; a < cols.size(); ++a)
      for (std::size_t b = a; b < cols.size(); ++b) h(cols[a], cols[b]) += s;
  }
  h = h.selfadjointView<Eigen::Upper>();
  h.diagonal().tail(static_cast<Eigen::Index>(data.m())) += 2.0 * lambda2 * data.pi();
  return h;
}

double classification_loss(const GamModel& model, const BinnedDataset& data) {
  return classification_loss(data, model.coefficients());
}
double penalty_l2(const GamModel& model, const BinnedDataset& data) { return penalty_l2(data, model.coefficients()); }

long penalty_steps(const GamModel& model) {
  long steps = 0;
  std::size_t offset = 0;
  for (const auto& e : model.bin_edges) {
    const std::size_t b = e.size() - 1;
    for (std::size_t k = 0; k + 1 < b; ++k) {
      const auto c = static_cast<Eigen::Index>(offset + k);
      if (model.omega(c) != model.omega(c + 1)) ++steps;
    }
    offset += b;
  }
  return steps;
}

LossBreakdown total_loss(const GamModel& model, const BinnedDataset& data) {
  return total_loss(data, model.coefficients(), model.lambda2, model.lambda_s);
}

Vec newton_minimize(const BinnedDataset& data, double lambda2, const ErmOptions& options, Vec start) {
  if (lambda2 < 0) throw SpecError("lambda2 must be non-negative");
  Vec x = start.size() == 0 ? Vec::Zero(static_cast<Eigen::Index>(data.dim())) : std::move(start);
  check_dim(data, x);
  auto objective = [&](const Vec& v) { return classification_loss(data, v) + lambda2 * penalty_l2(data, v); };

  double f = objective(x);
  double gnorm = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= options.max_iters; ++iter) {
    const Vec g = gradient(data, x, lambda2);
    gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= options.tol) return x;
    if (iter == options.max_iters) break;

    Mat h = hessian(data, x, lambda2);
    const double scale = 1.0 + h.diagonal().maxCoeff();
    Vec step;
    for (double damping = 1e-12 * scale; damping < 1e6 * scale; damping *= 100.0) {
      Mat hd = h;
      hd.diagonal().array() += damping;
      Eigen::LDLT<Mat> ldlt(hd);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) continue;
      step = ldlt.solve(-g);
      if (step.allFinite() && g.dot(step) < 0) break;
      step.resize(0);
    }
    if (step.size() == 0) step = -g;

    const double slope = g.dot(step);
    double t = 1.0;
    Vec trial = x + step;
    double ft = objective(trial);
    while (!(ft <= f + 1e-4 * t * slope) && t > 1e-12) {
      t *= 0.5;
      trial = x + t * step;
      ft = objective(trial);
    }
    if (!(ft <= f)) break;  // no descent possible at working precision
    x = std::move(trial);
    f = ft;
  }
  throw ConvergenceError("Newton solver did not reach gradient tolerance (|grad|_inf = " + std::to_string(gnorm) + ")",
                         x, gnorm);
}

GamModel fit_erm(const BinnedDataset& data, const Support& support, double lambda2, double lambda_s,
                 const ErmOptions& options) {
  if (lambda_s < 0) throw SpecError("lambda_s must be non-negative");
  const BinnedDataset reduced = collapse(data, support);
  const Vec packed = newton_minimize(reduced, lambda2, options);
  const Vec full = expand(support, packed);

  GamModel model;
  model.feature_names = data.feature_names();
  model.bin_edges = data.edges();
  model.pi = data.pi();
  model.intercept = full(0);
  model.omega = full.tail(full.size() - 1);
  model.support = support;
  model.lambda2 = lambda2;
  model.lambda_s = lambda_s;
  return model;
}

}  // namespace rashgam
