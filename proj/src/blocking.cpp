#include "rashgam/blocking.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "rashgam/errors.hpp"
#include "rashgam/parallel.hpp"

namespace rashgam {

std::size_t BlockLayout::coefficients() const { return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}); }

std::size_t BlockLayout::offset(std::size_t j) const {
  if (j >= sizes.size()) throw DimensionError("layout: feature index out of range");
  return 1 + std::accumulate(sizes.begin(), sizes.begin() + static_cast<std::ptrdiff_t>(j), std::size_t{0});
}

BlockLayout BlockLayout::from_support(const Support& support) {
  BlockLayout l;
  for (std::size_t j = 0; j < support.features(); ++j) l.sizes.push_back(support.runs(j).size());
  return l;
}

MergePlan::MergePlan(std::vector<std::vector<std::size_t>> pairs) : pairs_(std::move(pairs)) {
  for (auto& p : pairs_) {
    std::sort(p.begin(), p.end());
    if (std::adjacent_find(p.begin(), p.end()) != p.end()) throw SpecError("merge plan: repeated pair index");
  }
}

std::size_t MergePlan::merges() const {
  std::size_t n = 0;
  for (const auto& p : pairs_) n += p.size();
  return n;
}

void MergePlan::validate(const BlockLayout& layout) const {
  if (pairs_.size() != layout.features()) throw SpecError("merge plan: feature count does not match layout");
  for (std::size_t j = 0; j < pairs_.size(); ++j) {
    for (auto k : pairs_[j]) {
      if (k + 1 >= layout.sizes[j]) {
        throw SpecError("merge plan: pair " + std::to_string(k) + " outside feature " + std::to_string(j));
      }
    }
  }
}

std::vector<CoordRange> MergePlan::groups(const BlockLayout& layout) const {
  validate(layout);
  std::vector<CoordRange> out;
  for (std::size_t j = 0; j < pairs_.size(); ++j) {
    const std::size_t off = layout.offset(j);
    const auto& p = pairs_[j];
    for (std::size_t a = 0; a < p.size();) {
      std::size_t b = a;
      while (b + 1 < p.size() && p[b + 1] == p[b] + 1) ++b;
      out.emplace_back(off + p[a], off + p[b] + 1);
      a = b + 1;
    }
  }
  return out;
}

BlockLayout MergePlan::apply(const BlockLayout& layout) const {
  validate(layout);
  BlockLayout out = layout;
  for (std::size_t j = 0; j < pairs_.size(); ++j) out.sizes[j] -= pairs_[j].size();
  return out;
}

Support MergePlan::apply(const Support& support) const {
  validate(BlockLayout::from_support(support));
  std::vector<std::vector<std::size_t>> runs(support.features());
  for (std::size_t j = 0; j < support.features(); ++j) {
    const auto& old = support.runs(j);
    std::vector<char> merged_with_next(old.size(), 0);
    for (auto k : pairs_[j]) merged_with_next[k] = 1;
    std::size_t acc = 0;
    for (std::size_t k = 0; k < old.size(); ++k) {
      acc += old[k];
      if (!merged_with_next[k]) {
        runs[j].push_back(acc);
        acc = 0;
      }
    }
  }
  return Support(std::move(runs));
}

std::string MergePlan::encode() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t j = 0; j < pairs_.size(); ++j) {
    if (j) os << ',';
    os << '[';
    for (std::size_t a = 0; a < pairs_[j].size(); ++a) {
      if (a) os << ',';
      os << pairs_[j][a];
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

std::vector<std::size_t> reduction_map(std::size_t dim, const std::vector<CoordRange>& groups) {
  std::vector<CoordRange> sorted = groups;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t g = 0; g < sorted.size(); ++g) {
    if (sorted[g].first > sorted[g].second || sorted[g].second >= dim) throw SpecError("merge group out of range");
    if (g > 0 && sorted[g].first <= sorted[g - 1].second) throw SpecError("merge groups overlap");
  }
  std::vector<std::size_t> map(dim);
  std::size_t next = 0;
  std::size_t g = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (g < sorted.size() && i == sorted[g].first) {
      for (std::size_t k = sorted[g].first; k <= sorted[g].second; ++k) map[k] = next;
      i = sorted[g].second;
      ++g;
    } else {
      map[i] = next;
    }
    ++next;
  }
  return map;
}

namespace {

std::size_t reduced_dim(const std::vector<std::size_t>& map) {
  return map.empty() ? 0 : *std::max_element(map.begin(), map.end()) + 1;
}

Mat merge_quadratic_map(const Mat& Q, const std::vector<std::size_t>& map) {
  const auto dr = static_cast<Eigen::Index>(reduced_dim(map));
  Mat out = Mat::Zero(dr, dr);
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    const auto rj = static_cast<Eigen::Index>(map[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) out(static_cast<Eigen::Index>(map[static_cast<std::size_t>(i)]), rj) += Q(i, j);
  }
  return out;
}

Vec merge_linear_map(const Vec& l, const std::vector<std::size_t>& map) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(reduced_dim(map)));
  for (Eigen::Index i = 0; i < l.size(); ++i) out(static_cast<Eigen::Index>(map[static_cast<std::size_t>(i)])) += l(i);
  return out;
}

SlicedRashomon intersect_map(const Ellipsoid& e, std::vector<std::size_t> map, double loss_bound) {
  SlicedRashomon s;
  s.loss_bound = loss_bound;
  s.Q_tilde = merge_quadratic_map(e.Q(), map);
  const Vec l_tilde = merge_linear_map(e.Q() * e.center(), map);
  const Eigen::LLT<Mat> llt(s.Q_tilde);
  if (llt.info() != Eigen::Success) throw NumericalError("intersect: reduced quadratic is singular");
  s.center = llt.solve(l_tilde);
  s.map = std::move(map);
  // u = 1 - c^T Q c + c~^T Q~ c~, evaluated as 1 - r^T Q r with r = c - A c~
  // (same value, no cancellation between two large terms).
  const Vec r = e.center() - s.expand(s.center);
  s.u = 1.0 - r.dot(e.Q() * r);
  if (s.u > 0.0) s.ellipsoid = Ellipsoid(s.Q_tilde / s.u, s.center, e.provenance());
  return s;
}

}  // namespace

Mat merge_quadratic(const Mat& Q, const std::vector<CoordRange>& groups) {
  if (Q.rows() != Q.cols()) throw DimensionError("merge_quadratic: Q must be square");
  return merge_quadratic_map(Q, reduction_map(static_cast<std::size_t>(Q.rows()), groups));
}

Vec merge_linear(const Vec& l, const std::vector<CoordRange>& groups) {
  return merge_linear_map(l, reduction_map(static_cast<std::size_t>(l.size()), groups));
}

Vec SlicedRashomon::expand(const Vec& reduced) const {
  Vec out(static_cast<Eigen::Index>(map.size()));
  for (std::size_t i = 0; i < map.size(); ++i) out(static_cast<Eigen::Index>(i)) = reduced(static_cast<Eigen::Index>(map[i]));
  return out;
}

SlicedRashomon intersect(const Ellipsoid& e, const std::vector<CoordRange>& groups, double loss_bound) {
  return intersect_map(e, reduction_map(e.dim(), groups), loss_bound);
}

SlicedRashomon tie_coords(const Ellipsoid& e, const std::vector<std::vector<std::size_t>>& sets) {
  const std::size_t d = e.dim();
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> cls(d, unset);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (auto i : sets[s]) {
      if (i >= d) throw SpecError("tie_coords: index out of range");
      if (cls[i] != unset) throw SpecError("tie_coords: sets overlap");
      cls[i] = s;
    }
  }
  // Reduced coordinates ordered by the smallest member of each class.
  std::vector<std::size_t> map(d, unset);
  std::vector<std::size_t> class_to_reduced(sets.size(), unset);
  std::size_t next = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (cls[i] == unset) {
      map[i] = next++;
    } else {
      if (class_to_reduced[cls[i]] == unset) class_to_reduced[cls[i]] = next++;
      map[i] = class_to_reduced[cls[i]];
    }
  }
  return intersect_map(e, std::move(map), e.provenance().theta);
}

std::uint64_t count_subsets(std::size_t K, std::size_t p, std::size_t K_tilde) {
  if (K_tilde < p) throw SpecError("K_tilde must be >= number of features (merges cannot cross features)");
  if (K_tilde > K || p > K) throw SpecError("K_tilde must be <= K");
  const std::uint64_t n = K - p;
  std::uint64_t k = K - K_tilde;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    c = c * (n - i) / (i + 1);
    if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

std::vector<MergePlan> enumerate_plans(const BlockLayout& layout, std::size_t K_tilde, std::size_t limit, Rng& rng) {
  const std::size_t K = layout.coefficients();
  const std::uint64_t total = count_subsets(K, layout.features(), K_tilde);
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (feature, pair index)
  for (std::size_t j = 0; j < layout.features(); ++j)
    for (std::size_t k = 0; k + 1 < layout.sizes[j]; ++k) slots.emplace_back(j, k);
  const std::size_t r = K - K_tilde;

  auto make_plan = [&](const std::vector<std::size_t>& chosen) {
    std::vector<std::vector<std::size_t>> pairs(layout.features());
    for (auto s : chosen) pairs[slots[s].first].push_back(slots[s].second);
    return MergePlan(std::move(pairs));
  };

  std::vector<MergePlan> out;
  if (total <= limit) {
    std::vector<std::size_t> idx(r);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      out.push_back(make_plan(idx));
      // Next combination in lexicographic order.
      std::size_t i = r;
      while (i > 0 && idx[i - 1] == slots.size() - r + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t k = i; k < r; ++k) idx[k] = idx[k - 1] + 1;
    }
    return out;
  }

  std::unordered_set<std::string> seen;
  std::vector<std::size_t> perm(slots.size());
  const std::size_t max_draws = 100 * limit;
  for (std::size_t draw = 0; draw < max_draws && out.size() < limit; ++draw) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 0; i < r; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, perm.size() - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    std::vector<std::size_t> chosen(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(chosen.begin(), chosen.end());
    MergePlan plan = make_plan(chosen);
    if (seen.insert(plan.encode()).second) out.push_back(std::move(plan));
  }
  return out;
}

std::vector<ExploredPlan> explore(const Ellipsoid& e, const BlockLayout& layout, std::size_t K_tilde,
                                  std::size_t limit, double theta, double lambda_s, Rng& rng) {
  if (layout.dim() != e.dim()) throw DimensionError("explore: layout does not match ellipsoid dimension");
  const std::vector<MergePlan> plans = enumerate_plans(layout, K_tilde, limit, rng);
  const double bound = theta - lambda_s * static_cast<double>(layout.coefficients() - K_tilde);
  std::vector<std::optional<SlicedRashomon>> slices(plans.size());
  parallel_for(plans.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) slices[i] = intersect(e, plans[i].groups(layout), bound);
  });
  std::vector<ExploredPlan> out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (!slices[i]->empty()) out.push_back({plans[i], std::move(*slices[i])});
  }
  std::sort(out.begin(), out.end(),
            [](const ExploredPlan& a, const ExploredPlan& b) { return a.plan.encode() < b.plan.encode(); });
  return out;
}

}  // namespace rashgam
