#pragma once

#include <cstddef>
#include <vector>

#include "rashgam/objective.hpp"

namespace rashgam {

enum class Side { Left = -1, Right = 1 };

struct CoordInterval {
  std::size_t j = 0;
  double left = 0.0;
  double right = 0.0;
  double delta = 0.0;
  double width() const { return right - left; }
};

/// Steps away from w_j with doubling step sizes (delta, 2 delta, ...) and
/// returns the first abscissa whose loss exceeds theta. Throws NumericalError
/// after 200 doublings.
double get_bounds(const Objective& loss, const Vec& w, std::size_t j, double theta, double delta, Side side);

/// In-set interval of coordinate j through w (other coordinates held),
/// refined by bisection until each end is within delta of the boundary.
/// Throws SpecError if L(w) > theta.
CoordInterval segment_ends(const Objective& loss, const Vec& w, std::size_t j, double theta, double delta = 1e-6);

struct BoxVolume {
  std::vector<CoordInterval> intervals;
  double log_volume = 0.0;
  double volume() const;
};

/// Product of the coordinate interval widths at w.
BoxVolume box_volume(const Objective& loss, const Vec& w, double theta, double delta = 1e-6);

struct BoxSearchResult {
  Vec point;
  BoxVolume box;
  /// log box volume after each outer pass (non-decreasing).
  std::vector<double> history;
};

/// Cyclic coordinate ternary search for the point with the largest box volume.
/// Only improving moves are accepted.
BoxSearchResult bracketing_center_search(const Objective& loss, const Vec& w0, double theta, double delta = 1e-6,
                                         int max_iter = 10, int ternary_steps = 40);

}  // namespace rashgam
