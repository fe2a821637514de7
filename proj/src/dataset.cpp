#include "admmnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

#include "admmnn/random.hpp"

namespace admmnn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_real(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

DenseMatrix one_hot_encode(std::span<const std::size_t> labels, std::size_t classes) {
  DenseMatrix out(classes, labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] >= classes) throw DataError("one_hot_encode: label out of range");
    out(labels[j], j) = 1.0;
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> columns) const {
  Dataset out;
  out.features = features.select_columns(columns);
  out.one_hot = one_hot.select_columns(columns);
  out.labels.reserve(columns.size());
  for (std::size_t c : columns) out.labels.push_back(labels.at(c));
  out.class_names = class_names;
  out.name = name;
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> width;
  std::size_t label_col = 0;
  std::vector<std::size_t> feature_cols = schema.feature_columns;

  auto resolve_columns = [&](std::size_t ncols, const std::vector<std::string_view>* header) {
    width = ncols;
    if (const auto* idx = std::get_if<std::size_t>(&schema.label_column)) {
      label_col = *idx;
    } else {
      const auto& name = std::get<std::string>(schema.label_column);
      if (header == nullptr) {
        throw DataError("label column '" + name + "' given by name but the file has no header");
      }
      const auto it = std::find(header->begin(), header->end(), name);
      if (it == header->end()) throw DataError("unknown label column '" + name + "'");
      label_col = static_cast<std::size_t>(it - header->begin());
    }
    if (label_col >= ncols) {
      throw DataError("label column " + std::to_string(label_col) + " out of range for " +
                      std::to_string(ncols) + " columns");
    }
    if (feature_cols.empty()) {
      for (std::size_t c = 0; c < ncols; ++c) {
        if (c != label_col) feature_cols.push_back(c);
      }
    }
    for (std::size_t c : feature_cols) {
      if (c >= ncols) throw DataError("feature column " + std::to_string(c) + " out of range");
      if (c == label_col) throw DataError("label column is also listed as a feature column");
    }
  };

  if (schema.header) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw DataError("'" + path.string() + "' has no header line");
    const auto header = split_fields(line);
    resolve_columns(header.size(), &header);
  }

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::map<std::string, std::size_t, std::less<>> class_index;
  std::vector<std::string> class_names;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (schema.max_rows && labels.size() >= *schema.max_rows) break;
    const auto fields = split_fields(line);
    if (!width) resolve_columns(fields.size(), nullptr);
    if (fields.size() != *width) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(*width) + " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t c : feature_cols) {
      const auto v = parse_real(fields[c]);
      if (!v) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": column " +
                        std::to_string(c) + " is not a finite number: '" +
                        std::string(fields[c]) + "'");
      }
      values.push_back(*v);
    }
    const std::string_view label = fields[label_col];
    if (label.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty label");
    }
    auto it = class_index.find(label);
    if (it == class_index.end()) {
      it = class_index.emplace(std::string(label), class_names.size()).first;
      class_names.emplace_back(label);
    }
    labels.push_back(it->second);
  }
  if (labels.empty()) throw DataError("'" + path.string() + "' contains no data rows");

  // Rows were read sample-major; store column-per-sample.
  const std::size_t d = feature_cols.size();
  const std::size_t n = labels.size();
  Dataset ds;
  ds.features = transpose(DenseMatrix(n, d, std::move(values)));
  ds.one_hot = one_hot_encode(labels, class_names.size());
  ds.labels = std::move(labels);
  ds.class_names = std::move(class_names);
  ds.name = path.stem().string();
  return ds;
}

FeatureScaling fit_scaling(const Dataset& train) {
  const std::size_t d = train.feature_count();
  const std::size_t n = train.samples();
  if (n == 0) throw DataError("fit_scaling: empty dataset");
  FeatureScaling s{std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t i = 0; i < d; ++i) {
    const auto row = train.features.row(i);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : row) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.mean[i] = mean;
    s.std[i] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Dataset apply_scaling(const Dataset& ds, const FeatureScaling& scaling) {
  if (scaling.mean.size() != ds.feature_count() || scaling.std.size() != ds.feature_count()) {
    throw DimensionError("apply_scaling: scaling has wrong feature count");
  }
  Dataset out = ds;
  for (std::size_t i = 0; i < out.feature_count(); ++i) {
    for (double& v : out.features.row(i)) v = (v - scaling.mean[i]) / scaling.std[i];
  }
  return out;
}

StandardizedSplit standardize(const Dataset& train, const Dataset& test) {
  FeatureScaling scaling = fit_scaling(train);
  return {apply_scaling(train, scaling), apply_scaling(test, scaling), std::move(scaling)};
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument("train_test_split: test_fraction must lie in (0, 1)");
  }
  const std::size_t n = ds.samples();
  if (n < 2) throw DataError("train_test_split: need at least two samples");

  SeededRng rng(spec.seed);
  std::vector<std::size_t> test_idx;
  if (spec.stratified) {
    std::vector<std::vector<std::size_t>> by_class(ds.class_count());
    for (std::size_t j = 0; j < n; ++j) by_class[ds.labels[j]].push_back(j);
    for (const auto& members : by_class) {
      const auto k = static_cast<std::size_t>(
          std::llround(spec.test_fraction * static_cast<double>(members.size())));
      const auto perm = random_permutation(rng, members.size());
      for (std::size_t t = 0; t < k; ++t) test_idx.push_back(members[perm[t]]);
    }
  } else {
    const auto k =
        static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
    const auto perm = random_permutation(rng, n);
    test_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  }
  if (test_idx.empty() || test_idx.size() >= n) {
    throw DataError("train_test_split: test_fraction leaves an empty partition");
  }
  std::sort(test_idx.begin(), test_idx.end());
  std::vector<std::size_t> train_idx;
  train_idx.reserve(n - test_idx.size());
  std::size_t t = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (t < test_idx.size() && test_idx[t] == j) {
      ++t;
    } else {
      train_idx.push_back(j);
    }
  }
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

Dataset synthetic_blobs(std::size_t n_per_class, std::size_t d, std::size_t classes,
                        double separation, std::uint64_t seed) {
  if (d == 0 || classes < 2 || n_per_class == 0) {
    throw std::invalid_argument("synthetic_blobs: need d >= 1, classes >= 2, n_per_class >= 1");
  }
  if (classes > 2 * d) {
    throw std::invalid_argument("synthetic_blobs: at most 2 * d classes fit on the axes");
  }
  SeededRng rng(seed);
  const std::size_t n = n_per_class * classes;
  Dataset ds;
  ds.features = DenseMatrix(d, n);
  ds.labels.reserve(n);
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t axis = (c / 2) % d;
    const double sign = (c % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n_per_class; ++k) {
      const std::size_t j = c * n_per_class + k;
      for (std::size_t i = 0; i < d; ++i) {
        ds.features(i, j) = rng.next_gaussian() + (i == axis ? sign * separation : 0.0);
      }
      ds.labels.push_back(c);
    }
  }
  ds.one_hot = one_hot_encode(ds.labels, classes);
  for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back("class" + std::to_string(c));
  ds.name = "blobs";
  return ds;
}

}  // namespace admmnn
