#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rashgam/types.hpp"

namespace rashgam {

/// Unbinned samples: n rows of p real features plus a binary label.
class RawDataset {
 public:
  RawDataset(std::vector<std::string> feature_names, Mat features, std::vector<int> labels);

  std::size_t n() const { return labels_.size(); }
  std::size_t p() const { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Mat& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }

  RawDataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> feature_names_;
  Mat features_;
  std::vector<int> labels_;
};

/// CSV with a header row of feature names; the last column is the 0/1 label.
RawDataset read_csv(const std::filesystem::path& path);
RawDataset parse_csv(std::istream& in);

/// Per-feature strictly increasing edges b_0 < ... < b_B; bins are (b_k, b_{k+1}].
struct BinningSpec {
  std::vector<std::vector<double>> edges;

  std::size_t bins(std::size_t feature) const { return edges.at(feature).size() - 1; }
  /// Throws SpecError if any feature has fewer than two edges or non-increasing edges.
  void validate() const;
};

/// Equal-frequency edges from the empirical quantiles, duplicates collapsed.
BinningSpec make_quantile_spec(const RawDataset& raw, int max_bins_per_feature);

/// Column range of one feature inside the bin coordinates.
struct FeatureBlock {
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// One-hot binned design. Row i activates exactly one bin per feature; the
/// active bins are stored as per-feature local indices instead of a dense
/// n x m matrix.
class BinnedDataset {
 public:
  BinnedDataset(std::vector<std::string> feature_names, std::vector<std::vector<double>> edges,
                Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> bin_index,
                std::vector<int> labels);

  std::size_t n() const { return labels_.size(); }
  std::size_t p() const { return blocks_.size(); }
  /// Total number of bins m.
  std::size_t m() const { return m_; }
  /// Ellipsoid/coefficient dimension: intercept plus all bins.
  std::size_t dim() const { return m_ + 1; }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::vector<double>>& edges() const { return edges_; }
  const std::vector<FeatureBlock>& blocks() const { return blocks_; }
  const FeatureBlock& block(std::size_t j) const { return blocks_.at(j); }
  const std::vector<int>& labels() const { return labels_; }
  /// Occupancy fractions pi, length m.
  const Vec& pi() const { return pi_; }
  /// Global bin column (0-based, excluding the intercept) active for row i, feature j.
  std::size_t column(std::size_t row, std::size_t feature) const {
    return blocks_[feature].offset + static_cast<std::size_t>(bin_index_(static_cast<Eigen::Index>(row),
                                                                         static_cast<Eigen::Index>(feature)));
  }
  const Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>& bin_index() const { return bin_index_; }

  /// Dense n x m one-hot matrix (diagnostics and tests).
  Mat one_hot() const;

  /// Rows resampled or split; pi is recomputed from the selected rows.
  BinnedDataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> feature_names_;
  std::vector<std::vector<double>> edges_;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> bin_index_;
  std::vector<int> labels_;
  std::vector<FeatureBlock> blocks_;
  std::size_t m_ = 0;
  Vec pi_;
};

/// Throws OutOfRangeError when a value lies outside (b_0, b_B].
BinnedDataset bin(const RawDataset& raw, const BinningSpec& spec);

/// FNV-1a hash of a file's bytes, used in report manifests.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace rashgam
