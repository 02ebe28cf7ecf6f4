#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rashgam/ellipsoid.hpp"
#include "rashgam/gam.hpp"

namespace rashgam {

/// Inclusive coordinate range [first, last] collapsed to one coordinate.
using CoordRange = std::pair<std::size_t, std::size_t>;

/// Per-feature block sizes of a Rashomon coordinate vector (intercept at 0,
/// then the features' coefficients in order).
struct BlockLayout {
  std::vector<std::size_t> sizes;

  static BlockLayout from_support(const Support& support);
  std::size_t features() const { return sizes.size(); }
  std::size_t coefficients() const;  // K
  std::size_t dim() const { return coefficients() + 1; }
  /// Ellipsoid coordinate of the first coefficient of feature j.
  std::size_t offset(std::size_t j) const;
};

/// Adjacent-coefficient merges, stored per feature as the indices k of the
/// merged pairs (k, k+1) in the feature's local numbering.
class MergePlan {
 public:
  MergePlan() = default;
  explicit MergePlan(std::vector<std::vector<std::size_t>> pairs);

  const std::vector<std::vector<std::size_t>>& pairs() const { return pairs_; }
  std::size_t merges() const;
  void validate(const BlockLayout& layout) const;
  /// Groups as ellipsoid coordinate ranges, sorted.
  std::vector<CoordRange> groups(const BlockLayout& layout) const;
  /// Sizes of the merged layout.
  BlockLayout apply(const BlockLayout& layout) const;
  /// Support with the merged runs joined.
  Support apply(const Support& support) const;
  /// Canonical JSON array encoding, e.g. [[0],[],[1,2]].
  std::string encode() const;

  bool operator==(const MergePlan&) const = default;

 private:
  std::vector<std::vector<std::size_t>> pairs_;
};

/// Original coordinate -> reduced coordinate for a set of disjoint ranges.
/// Throws SpecError on overlapping or out-of-range groups.
std::vector<std::size_t> reduction_map(std::size_t dim, const std::vector<CoordRange>& groups);

/// Q~: rows and columns of each group summed.
Mat merge_quadratic(const Mat& Q, const std::vector<CoordRange>& groups);
/// l~: entries of each group summed.
Vec merge_linear(const Vec& l, const std::vector<CoordRange>& groups);

struct SlicedRashomon {
  /// Ellipsoid on the reduced coordinates; empty when u <= 0.
  std::optional<Ellipsoid> ellipsoid;
  double u = 0.0;
  /// Reduced center Q~^{-1} l~ (defined even when empty).
  Vec center;
  Mat Q_tilde;
  double loss_bound = 0.0;
  /// Original coordinate -> reduced coordinate.
  std::vector<std::size_t> map;

  bool empty() const { return !ellipsoid.has_value(); }
  /// Reduced vector to original coordinates (v copied into each group).
  Vec expand(const Vec& reduced) const;
};

/// Restriction of `e` to the subspace where each group's coordinates are equal.
/// `loss_bound` is attached unchanged.
SlicedRashomon intersect(const Ellipsoid& e, const std::vector<CoordRange>& groups, double loss_bound);

/// Arbitrary coordinate ties (each set collapses to one coordinate). Testing aid.
SlicedRashomon tie_coords(const Ellipsoid& e, const std::vector<std::vector<std::size_t>>& sets);

/// Number of plans reducing K to K_tilde: binom(K - p, K - K_tilde).
/// Saturates at UINT64_MAX.
std::uint64_t count_subsets(std::size_t K, std::size_t p, std::size_t K_tilde);

/// All plans when the count is <= limit (lexicographic order), otherwise
/// `limit` distinct plans drawn uniformly.
std::vector<MergePlan> enumerate_plans(const BlockLayout& layout, std::size_t K_tilde, std::size_t limit, Rng& rng);

struct ExploredPlan {
  MergePlan plan;
  SlicedRashomon slice;
};

/// Nonempty slices of `e` (fitted at theta = delta + lambda_s (K - K_tilde))
/// over the enumerated plans, sorted by plan encoding. Loss bounds are
/// theta - lambda_s (K - K_tilde).
std::vector<ExploredPlan> explore(const Ellipsoid& e, const BlockLayout& layout, std::size_t K_tilde,
                                  std::size_t limit, double theta, double lambda_s, Rng& rng);

}  // namespace rashgam
