#include "rashgam/box_oracle.hpp"

#include <cmath>
#include <limits>

#include "rashgam/errors.hpp"
#include "rashgam/parallel.hpp"

namespace rashgam {

namespace {

double loss_at(const Objective& loss, Vec& w, std::size_t j, double x) {
  const auto jj = static_cast<Eigen::Index>(j);
  const double saved = w(jj);
  w(jj) = x;
  const double v = loss.value(w);
  w(jj) = saved;
  return v;
}

}  // namespace

double get_bounds(const Objective& loss, const Vec& w, std::size_t j, double theta, double delta, Side side) {
  if (!(delta > 0)) throw SpecError("get_bounds: delta must be positive");
  if (j >= static_cast<std::size_t>(w.size())) throw DimensionError("get_bounds: coordinate out of range");
  Vec work = w;
  const double dir = side == Side::Right ? 1.0 : -1.0;
  double x = w(static_cast<Eigen::Index>(j));
  double step = delta;
  for (int i = 0; i < 200; ++i) {
    x += dir * step;
    if (loss_at(loss, work, j, x) > theta) return x;
    step *= 2.0;
  }
  throw NumericalError("get_bounds: loss never exceeded theta along coordinate " + std::to_string(j) +
                       " (unbounded direction?)");
}

CoordInterval segment_ends(const Objective& loss, const Vec& w, std::size_t j, double theta, double delta) {
  if (loss.value(w) > theta) throw SpecError("segment_ends: starting point is outside the Rashomon set");
  Vec work = w;
  const double inside = w(static_cast<Eigen::Index>(j));
  CoordInterval out;
  out.j = j;
  out.delta = delta;
  for (Side side : {Side::Left, Side::Right}) {
    double in = inside;
    double outp = get_bounds(loss, w, j, theta, delta, side);
    while (std::abs(outp - in) >= delta) {
      const double mid = 0.5 * (in + outp);
      if (mid == in || mid == outp) break;
      if (loss_at(loss, work, j, mid) <= theta) {
        in = mid;
      } else {
        outp = mid;
      }
    }
    (side == Side::Left ? out.left : out.right) = in;
  }
  return out;
}

double BoxVolume::volume() const { return std::exp(log_volume); }

BoxVolume box_volume(const Objective& loss, const Vec& w, double theta, double delta) {
  const auto d = static_cast<std::size_t>(w.size());
  BoxVolume out;
  out.intervals.resize(d);
  parallel_for(d, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) out.intervals[j] = segment_ends(loss, w, j, theta, delta);
  });
  double lv = 0.0;
  for (const auto& iv : out.intervals) lv += std::log(iv.width());
  out.log_volume = lv;
  return out;
}

BoxSearchResult bracketing_center_search(const Objective& loss, const Vec& w0, double theta, double delta,
                                         int max_iter, int ternary_steps) {
  BoxSearchResult res;
  res.point = w0;
  res.box = box_volume(loss, w0, theta, delta);
  auto score = [&](const Vec& w) {
    if (loss.value(w) > theta) return -std::numeric_limits<double>::infinity();
    return box_volume(loss, w, theta, delta).log_volume;
  };
  double best = res.box.log_volume;
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(w0.size()); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const CoordInterval iv = segment_ends(loss, res.point, j, theta, delta);
      double lo = iv.left;
      double hi = iv.right;
      Vec probe = res.point;
      for (int s = 0; s < ternary_steps && hi - lo > delta; ++s) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        probe(jj) = m1;
        const double f1 = score(probe);
        probe(jj) = m2;
        const double f2 = score(probe);
        if (f1 < f2) {
          lo = m1;
        } else {
          hi = m2;
        }
      }
      // Compare the bracket ends and keep the better one if it improves.
      double cand = lo;
      probe(jj) = lo;
      double fc = score(probe);
      probe(jj) = hi;
      const double fh = score(probe);
      if (fh > fc) {
        cand = hi;
        fc = fh;
      }
      if (fc > best) {
        best = fc;
        res.point(jj) = cand;
      }
    }
    res.history.push_back(best);
  }
  res.box = box_volume(loss, res.point, theta, delta);
  return res;
}

}  // namespace rashgam
