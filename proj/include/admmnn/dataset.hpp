#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "admmnn/linalg.hpp"

namespace admmnn {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Labeled samples, one column per sample.
struct Dataset {
  DenseMatrix features;               // D x N
  std::vector<std::size_t> labels;    // N class indices
  DenseMatrix one_hot;                // OS x N
  std::vector<std::string> class_names;
  std::string name;

  std::size_t samples() const noexcept { return labels.size(); }
  std::size_t feature_count() const noexcept { return features.rows(); }
  std::size_t class_count() const noexcept { return class_names.size(); }

  /// Subset of the given sample columns; class_names are kept whole so the
  /// one-hot height does not depend on which classes the subset contains.
  Dataset subset(std::span<const std::size_t> columns) const;
};

DenseMatrix one_hot_encode(std::span<const std::size_t> labels, std::size_t classes);

struct CsvSchema {
  /// Label column by zero-based index or by header name.
  std::variant<std::size_t, std::string> label_column = std::size_t{0};
  /// Feature columns; empty means every column except the label.
  std::vector<std::size_t> feature_columns;
  bool header = false;
  /// Read at most this many data rows.
  std::optional<std::size_t> max_rows;
};

/// Parses a comma-separated file. Labels map to class indices in order of
/// first appearance.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

struct FeatureScaling {
  std::vector<double> mean;
  std::vector<double> std;
};

/// Per-feature mean and population std of the given data. Zero-variance
/// features get std 1.
FeatureScaling fit_scaling(const Dataset& train);
Dataset apply_scaling(const Dataset& ds, const FeatureScaling& scaling);

struct StandardizedSplit {
  Dataset train;
  Dataset test;
  FeatureScaling scaling;
};

/// Standardizes both partitions with statistics from `train` only.
StandardizedSplit standardize(const Dataset& train, const Dataset& test);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  bool stratified = true;
};

/// Seeded partition; sample order inside each part follows the source.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec);

/// Gaussian blobs with unit noise. Class c is centred at
/// +/- separation along axis (c / 2) mod d, positive for even c.
Dataset synthetic_blobs(std::size_t n_per_class, std::size_t d, std::size_t classes,
                        double separation, std::uint64_t seed);

}  // namespace admmnn
