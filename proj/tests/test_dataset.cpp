#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "admmnn/dataset.hpp"
#include "admmnn/harness.hpp"

using namespace admmnn;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path(fs::temp_directory_path() / ("admmnn_test_" + name)) {
    std::ofstream(path) << content;
  }
  ~TempFile() { fs::remove(path); }
};

std::string error_of(const fs::path& p, const CsvSchema& schema) {
  try {
    (void)load_csv(p, schema);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

Dataset iris() {
  CsvSchema schema;
  schema.header = true;
  schema.label_column = std::string("species");
  return load_csv(default_data_dir() / "iris.csv", schema);
}

}  // namespace

TEST_CASE("one-hot encoding") {
  const std::vector<std::size_t> labels{2, 0, 1, 2};
  const DenseMatrix oh = one_hot_encode(labels, 3);
  CHECK(oh.rows() == 3);
  CHECK(oh.cols() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) sum += oh(i, j);
    CHECK(sum == 1.0);
    CHECK(oh(labels[j], j) == 1.0);
  }
  CHECK_THROWS_AS(one_hot_encode(labels, 2), DataError);
}

TEST_CASE("csv loading") {
  SUBCASE("toy file round-trips") {
    const TempFile f("toy.csv", "1.5,2,a\n-3,4e-1,b\n0,7,a\n");
    CsvSchema schema;
    schema.label_column = std::size_t{2};
    const Dataset ds = load_csv(f.path, schema);
    CHECK(ds.features == DenseMatrix{{1.5, -3.0, 0.0}, {2.0, 0.4, 7.0}});
    CHECK(ds.labels == std::vector<std::size_t>{0, 1, 0});
    CHECK(ds.class_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.one_hot == DenseMatrix{{1, 0, 1}, {0, 1, 0}});
    CHECK(ds.name == "admmnn_test_toy");
  }

  SUBCASE("label by header name, selected features, row limit") {
    const TempFile f("named.csv", "x,y,class,z\n1,2,u,3\n4,5,v,6\n7,8,u,9\n");
    CsvSchema schema;
    schema.header = true;
    schema.label_column = std::string("class");
    schema.feature_columns = {3, 0};
    schema.max_rows = 2;
    const Dataset ds = load_csv(f.path, schema);
    CHECK(ds.features == DenseMatrix{{3, 6}, {1, 4}});
    CHECK(ds.labels == std::vector<std::size_t>{0, 1});
  }

  SUBCASE("errors are descriptive") {
    CsvSchema schema;
    CHECK(error_of("/nonexistent/file.csv", schema).find("cannot open") != std::string::npos);

    const TempFile bad("bad.csv", "a,1,2\nb,1,oops\n");
    const std::string msg = error_of(bad.path, schema);
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);

    const TempFile ragged("ragged.csv", "a,1,2\nb,1\n");
    CHECK(error_of(ragged.path, schema).find(":2:") != std::string::npos);

    CsvSchema named;
    named.header = true;
    named.label_column = std::string("label");
    const TempFile hdr("hdr.csv", "x,y\n1,2\n");
    CHECK(error_of(hdr.path, named).find("unknown label column") != std::string::npos);

    CsvSchema far;
    far.label_column = std::size_t{9};
    CHECK(error_of(hdr.path, far).find("out of range") != std::string::npos);
  }
}

TEST_CASE("iris file") {
  const Dataset ds = iris();
  CHECK(ds.feature_count() == 4);
  CHECK(ds.class_count() == 3);
  CHECK(ds.samples() == 150);
  CHECK(ds.class_names.front() == "Iris-setosa");
  for (std::size_t j = 0; j < ds.samples(); ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < ds.class_count(); ++i) {
      if (ds.one_hot(i, j) > ds.one_hot(arg, j)) arg = i;
    }
    CHECK(arg == ds.labels[j]);
  }
}

TEST_CASE("standardization") {
  SUBCASE("hand example") {
    Dataset train;
    train.features = DenseMatrix{{1, 2, 3}, {2, 2, 2}};
    train.labels = {0, 1, 0};
    train.class_names = {"a", "b"};
    train.one_hot = one_hot_encode(train.labels, 2);
    Dataset test = train;
    test.features = DenseMatrix{{4, 0, 2}, {5, 2, 2}};

    const StandardizedSplit s = standardize(train, test);
    const double sd = std::sqrt(2.0 / 3.0);
    CHECK(s.scaling.mean == std::vector<double>{2.0, 2.0});
    CHECK(s.scaling.std[0] == doctest::Approx(sd));
    CHECK(s.scaling.std[1] == 1.0);
    CHECK(s.train.features(0, 0) == doctest::Approx(-1.0 / sd));
    CHECK(s.train.features(0, 2) == doctest::Approx(1.0 / sd));
    CHECK(s.train.features.row(1)[0] == 0.0);  // constant feature: centred zeros
    CHECK(s.test.features(0, 0) == doctest::Approx(2.0 / sd));
    CHECK(s.test.features(1, 0) == doctest::Approx(3.0));
  }

  SUBCASE("idempotent on standardized data") {
    const Dataset ds = iris();
    const Dataset once = apply_scaling(ds, fit_scaling(ds));
    const Dataset twice = apply_scaling(once, fit_scaling(once));
    for (std::size_t i = 0; i < once.features.size(); ++i) {
      CHECK(std::abs(once.features.values()[i] - twice.features.values()[i]) <= 1e-12);
    }
  }

  SUBCASE("statistics come from the training partition only") {
    const Dataset ds = iris();
    const auto [train, test] = train_test_split(ds, SplitSpec{0.2, 4, true});
    const StandardizedSplit s = standardize(train, test);
    for (std::size_t i = 0; i < train.feature_count(); ++i) {
      double sum = 0.0;
      for (double v : train.features.row(i)) sum += v;
      const double mean = sum / static_cast<double>(train.samples());
      double sq = 0.0;
      for (double v : train.features.row(i)) sq += (v - mean) * (v - mean);
      const double sd = std::sqrt(sq / static_cast<double>(train.samples()));
      CHECK(s.scaling.mean[i] == doctest::Approx(mean).epsilon(1e-14));
      CHECK(s.scaling.std[i] == doctest::Approx(sd).epsilon(1e-14));
      for (std::size_t j = 0; j < test.samples(); ++j) {
        CHECK(s.test.features(i, j) == doctest::Approx((test.features(i, j) - mean) / sd));
      }
      double zsum = 0.0, zsq = 0.0;
      for (double v : s.train.features.row(i)) {
        zsum += v;
        zsq += v * v;
      }
      CHECK(std::abs(zsum) <= 1e-10);
      CHECK(zsq / static_cast<double>(train.samples()) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("train/test split") {
  const Dataset ds = iris();

  SUBCASE("sizes and stratification") {
    const auto [train, test] = train_test_split(ds, SplitSpec{0.2, 1, true});
    CHECK(train.samples() == 120);
    CHECK(test.samples() == 30);
    std::vector<std::size_t> per_class(3, 0);
    for (auto l : test.labels) ++per_class[l];
    CHECK(per_class == std::vector<std::size_t>{10, 10, 10});
    CHECK(train.class_names == ds.class_names);
  }

  SUBCASE("unstratified sizes") {
    const auto [train, test] = train_test_split(ds, SplitSpec{0.2, 1, false});
    CHECK(train.samples() == 120);
    CHECK(test.samples() == 30);
  }

  SUBCASE("deterministic per seed, disjoint and exhaustive") {
    const auto a = train_test_split(ds, SplitSpec{0.3, 5, true});
    const auto b = train_test_split(ds, SplitSpec{0.3, 5, true});
    const auto c = train_test_split(ds, SplitSpec{0.3, 6, true});
    CHECK(a.first.features == b.first.features);
    CHECK(a.second.labels == b.second.labels);
    CHECK_FALSE(a.second.features == c.second.features);

    // Every source column appears in exactly one part.
    std::multiset<std::vector<double>> all, parts;
    for (std::size_t j = 0; j < ds.samples(); ++j) all.insert(ds.features.column(j));
    for (const Dataset* part : {&a.first, &a.second}) {
      for (std::size_t j = 0; j < part->samples(); ++j) parts.insert(part->features.column(j));
    }
    CHECK(all == parts);
  }

  SUBCASE("invalid fractions") {
    CHECK_THROWS(train_test_split(ds, SplitSpec{0.0, 1, true}));
    CHECK_THROWS(train_test_split(ds, SplitSpec{1.0, 1, true}));
    CHECK_THROWS_AS(train_test_split(ds.subset(std::vector<std::size_t>{0, 1, 2}),
                                     SplitSpec{0.01, 1, true}),
                    DataError);
  }
}

TEST_CASE("synthetic blobs") {
  const Dataset a = synthetic_blobs(40, 3, 4, 8.0, 2);
  CHECK(a.samples() == 160);
  CHECK(a.feature_count() == 3);
  CHECK(a.class_count() == 4);
  CHECK(synthetic_blobs(40, 3, 4, 8.0, 2).features == a.features);
  CHECK_FALSE(synthetic_blobs(40, 3, 4, 8.0, 3).features == a.features);

  const Dataset tiny = synthetic_blobs(5, 1, 2, 1.0, 0);
  CHECK(tiny.features.rows() == 1);
  CHECK(tiny.features.cols() == 10);
  CHECK(tiny.one_hot.rows() == 2);
  CHECK_THROWS(synthetic_blobs(5, 1, 3, 1.0, 0));

  SUBCASE("well separated blobs are linearly separable") {
    // Least-squares linear classifier with a bias row.
    DenseMatrix aug(a.samples(), a.feature_count() + 1);
    for (std::size_t j = 0; j < a.samples(); ++j) {
      for (std::size_t i = 0; i < a.feature_count(); ++i) aug(j, i) = a.features(i, j);
      aug(j, a.feature_count()) = 1.0;
    }
    std::vector<Vector> targets;
    for (std::size_t c = 0; c < a.class_count(); ++c) {
      const auto row = a.one_hot.row(c);
      targets.emplace_back(row.begin(), row.end());
    }
    const auto weights = solve_least_squares_direct_multi(aug, targets);
    DenseMatrix scores(a.class_count(), a.samples());
    for (std::size_t c = 0; c < a.class_count(); ++c) {
      const Vector s = matvec(aug, weights[c]);
      for (std::size_t j = 0; j < a.samples(); ++j) scores(c, j) = s[j];
    }
    std::size_t correct = 0;
    for (std::size_t j = 0; j < a.samples(); ++j) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < a.class_count(); ++c) {
        if (scores(c, j) > scores(arg, j)) arg = c;
      }
      correct += arg == a.labels[j];
    }
    CHECK(correct == a.samples());
  }
}
