#include "rashgam/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rashgam/errors.hpp"

namespace rashgam {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

RawDataset::RawDataset(std::vector<std::string> feature_names, Mat features, std::vector<int> labels)
    : feature_names_(std::move(feature_names)), features_(std::move(features)), labels_(std::move(labels)) {
  if (labels_.empty()) throw DataError("dataset has no rows");
  if (static_cast<std::size_t>(features_.rows()) != labels_.size() ||
      static_cast<std::size_t>(features_.cols()) != feature_names_.size()) {
    throw DimensionError("feature matrix shape does not match names/labels");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 0 && labels_[i] != 1) {
      throw DataError("row " + std::to_string(i) + ": label must be 0 or 1");
    }
  }
}

RawDataset RawDataset::subset(std::span<const std::size_t> rows) const {
  Mat x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(rows[r]));
    y.push_back(labels_.at(rows[r]));
  }
  return RawDataset(feature_names_, std::move(x), std::move(y));
}

RawDataset parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    for (auto f : split_fields(view)) header.emplace_back(f);
    break;
  }
  if (header.size() < 2) throw DataError("CSV header needs at least one feature and a label column");
  const std::size_t p = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < p; ++j) values.push_back(parse_double(fields[j], line_no));
    const double y = parse_double(fields[p], line_no);
    if (y != 0.0 && y != 1.0) throw DataError("line " + std::to_string(line_no) + ": label must be 0 or 1");
    labels.push_back(static_cast<int>(y));
  }
  if (labels.empty()) throw DataError("CSV has no data rows");

  Mat x(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < p; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * p + j];
  header.pop_back();
  return RawDataset(std::move(header), std::move(x), std::move(labels));
}

RawDataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in);
}

void BinningSpec::validate() const {
  for (std::size_t j = 0; j < edges.size(); ++j) {
    const auto& e = edges[j];
    if (e.size() < 2) throw SpecError("feature " + std::to_string(j) + ": need at least two bin edges");
    for (std::size_t k = 1; k < e.size(); ++k) {
      if (!(e[k] > e[k - 1])) {
        throw SpecError("feature " + std::to_string(j) + ": bin edges must be strictly increasing");
      }
    }
  }
}

BinningSpec make_quantile_spec(const RawDataset& raw, int max_bins_per_feature) {
  if (max_bins_per_feature < 1) throw SpecError("max_bins_per_feature must be >= 1");
  BinningSpec spec;
  const std::size_t n = raw.n();
  const auto bins = static_cast<std::size_t>(max_bins_per_feature);
  for (std::size_t j = 0; j < raw.p(); ++j) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = raw.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    std::sort(v.begin(), v.end());
    const double lo = v.front();
    const double hi = v.back();
    const double pad = 1e-3 * std::max({1.0, hi - lo, std::abs(lo)});

    std::vector<double> e{lo - pad};
    for (std::size_t q = 1; q < bins; ++q) {
      // Upper edge of the q-th equal-frequency group; (a, b] keeps ties together.
      const std::size_t idx = (q * n) / bins;
      if (idx == 0) continue;
      const double edge = v[idx - 1];
      if (edge > e.back() && edge < hi) e.push_back(edge);
    }
    e.push_back(hi);
    spec.edges.push_back(std::move(e));
  }
  return spec;
}

BinnedDataset::BinnedDataset(std::vector<std::string> feature_names, std::vector<std::vector<double>> edges,
                             Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> bin_index,
                             std::vector<int> labels)
    : feature_names_(std::move(feature_names)),
      edges_(std::move(edges)),
      bin_index_(std::move(bin_index)),
      labels_(std::move(labels)) {
  const std::size_t p = feature_names_.size();
  if (edges_.size() != p || static_cast<std::size_t>(bin_index_.cols()) != p ||
      static_cast<std::size_t>(bin_index_.rows()) != labels_.size()) {
    throw DimensionError("binned dataset: inconsistent shapes");
  }
  if (labels_.empty()) throw DataError("binned dataset has no rows");
  blocks_.resize(p);
  std::size_t offset = 0;
  for (std::size_t j = 0; j < p; ++j) {
    if (edges_[j].size() < 2) throw SpecError("feature " + std::to_string(j) + " has no bins");
    blocks_[j] = {offset, edges_[j].size() - 1};
    offset += blocks_[j].size;
  }
  m_ = offset;

  pi_ = Vec::Zero(static_cast<Eigen::Index>(m_));
  for (Eigen::Index i = 0; i < bin_index_.rows(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const int k = bin_index_(i, static_cast<Eigen::Index>(j));
      if (k < 0 || static_cast<std::size_t>(k) >= blocks_[j].size) {
        throw DimensionError("bin index out of range for feature " + std::to_string(j));
      }
      pi_(static_cast<Eigen::Index>(blocks_[j].offset + static_cast<std::size_t>(k))) += 1.0;
    }
  }
  pi_ /= static_cast<double>(labels_.size());
}

Mat BinnedDataset::one_hot() const {
  Mat x = Mat::Zero(static_cast<Eigen::Index>(n()), static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = 0; j < p(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(column(i, j))) = 1.0;
  return x;
}

BinnedDataset BinnedDataset::subset(std::span<const std::size_t> rows) const {
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> idx(static_cast<Eigen::Index>(rows.size()), bin_index_.cols());
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    idx.row(static_cast<Eigen::Index>(r)) = bin_index_.row(static_cast<Eigen::Index>(rows[r]));
    y.push_back(labels_.at(rows[r]));
  }
  return BinnedDataset(feature_names_, edges_, std::move(idx), std::move(y));
}

BinnedDataset bin(const RawDataset& raw, const BinningSpec& spec) {
  spec.validate();
  if (spec.edges.size() != raw.p()) throw DimensionError("binning spec has wrong number of features");
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> idx(static_cast<Eigen::Index>(raw.n()),
                                                        static_cast<Eigen::Index>(raw.p()));
  for (std::size_t j = 0; j < raw.p(); ++j) {
    const auto& e = spec.edges[j];
    for (std::size_t i = 0; i < raw.n(); ++i) {
      const double x = raw.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!(x > e.front()) || x > e.back()) {
        throw OutOfRangeError("feature '" + raw.feature_names()[j] + "' row " + std::to_string(i) + ": value " +
                                  std::to_string(x) + " outside (" + std::to_string(e.front()) + ", " +
                                  std::to_string(e.back()) + "]",
                              j, i);
      }
      // First edge >= x closes the bin on the right.
      const auto it = std::lower_bound(e.begin() + 1, e.end(), x);
      idx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<int>(it - e.begin()) - 1;
    }
  }
  return BinnedDataset(raw.feature_names(), spec.edges, std::move(idx), raw.labels());
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace rashgam
