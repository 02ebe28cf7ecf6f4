#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace rashgam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Explicit random stream. Every stochastic routine takes one by reference so
/// results replay exactly for a given seed.
using Rng = std::mt19937_64;

/// Derive an independent stream from a root seed and a cell key.
Rng fork_stream(std::uint64_t root_seed, std::uint64_t key);

/// Pairwise (cascade) summation; order-stable for a given input.
double pairwise_sum(std::span<const double> values);

}  // namespace rashgam
