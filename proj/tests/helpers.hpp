#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "rashgam/dataset.hpp"
#include "rashgam/ellipsoid.hpp"
#include "rashgam/types.hpp"

namespace testutil {

using rashgam::Mat;
using rashgam::Rng;
using rashgam::Vec;

inline Mat random_spd(Eigen::Index d, Rng& rng, double floor = 0.2) {
  std::normal_distribution<double> N;
  Mat A(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) A(i, j) = N(rng);
  Mat Q = A * A.transpose() / static_cast<double>(d) + floor * Mat::Identity(d, d);
  return 0.5 * (Q + Q.transpose());
}

inline Vec random_vec(Eigen::Index d, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = N(rng);
  return v;
}

/// Synthetic binned data: p features with the given bin counts, labels drawn
/// from a logistic model with coefficients `truth` (intercept first).
inline rashgam::BinnedDataset synthetic_binned(const std::vector<int>& bins, std::size_t n, const Vec& truth,
                                               Rng& rng) {
  const auto p = bins.size();
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> idx(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<int> labels(n);
  std::uniform_real_distribution<double> U;
  std::vector<std::vector<double>> edges(p);
  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) {
    names[j] = "x" + std::to_string(j);
    for (int k = 0; k <= bins[j]; ++k) edges[j].push_back(k);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double z = truth(0);
    std::size_t off = 1;
    for (std::size_t j = 0; j < p; ++j) {
      const int b = std::uniform_int_distribution<int>(0, bins[j] - 1)(rng);
      idx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b;
      z += truth(static_cast<Eigen::Index>(off + static_cast<std::size_t>(b)));
      off += static_cast<std::size_t>(bins[j]);
    }
    labels[i] = U(rng) < 1.0 / (1.0 + std::exp(-z)) ? 1 : 0;
  }
  return rashgam::BinnedDataset(names, edges, idx, labels);
}

}  // namespace testutil
