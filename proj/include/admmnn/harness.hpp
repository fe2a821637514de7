#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "admmnn/admm.hpp"
#include "admmnn/dataset.hpp"
#include "admmnn/stats.hpp"

namespace admmnn {

/// Bad user configuration; maps to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Method { admm_lsmr, admm_direct, sgd, adam };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

enum class Command { train, compare, bench };

struct RunConfig {
  std::vector<Method> methods{Method::admm_lsmr};
  std::string preset;
  std::filesystem::path data;
  std::string label_column = "0";
  bool header = false;
  std::optional<std::size_t> max_rows;

  /// Weight layers; a 3-layer network has two hidden layers.
  std::size_t layers = 3;
  std::size_t hidden_size = 8;
  std::size_t iters = 50;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t runs = 1;
  double gamma = 10.0;
  double beta = 1.0;
  double init_std = 0.1;
  double lsmr_atol = 1e-8;
  double lsmr_btol = 1e-8;
  std::optional<std::size_t> lsmr_max_iters;
  double sgd_lr = 1e-2;
  double adam_lr = 1e-3;
  double test_fraction = 0.2;
  std::vector<std::size_t> hidden_sizes;
  std::size_t repeats = 10;
  std::filesystem::path out;

  /// Throws ValidationError before any data is touched.
  void validate(Command command) const;
};

/// Applies one `key=value` setting; keys are the long flag names without
/// the leading dashes. Throws ValidationError on unknown keys or bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Applies a named preset's defaults (`iris`, `higgs-subset`, `blobs`).
void apply_preset(RunConfig& config, std::string_view name);

/// Builds a config from ordered settings: the preset (if any) first, then
/// every other setting in order, so later settings win.
RunConfig build_config(const std::vector<std::pair<std::string, std::string>>& settings);

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path);

/// Directory searched for preset data files: $ADMMNN_DATA_DIR, else the
/// data/ directory of the source tree.
std::filesystem::path default_data_dir();

/// Full dataset named by the config (preset or --data).
Dataset load_experiment_data(const RunConfig& config);

/// Stratified split with `seed`, standardized with training statistics.
StandardizedSplit prepare_split(const Dataset& full, const RunConfig& config, std::uint64_t seed);

std::vector<std::size_t> network_dims(const RunConfig& config, std::size_t inputs,
                                      std::size_t hidden_size, std::size_t outputs);

HyperParams admm_hyperparams(const RunConfig& config, Method method, std::uint64_t seed);

struct MetricRow {
  std::size_t iteration = 0;
  double objective = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> constraint_residual;
};

struct RunOutcome {
  Method method = Method::admm_lsmr;
  std::uint64_t seed = 0;
  std::vector<MetricRow> metrics;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

RunOutcome run_single(Method method, const Dataset& full, const RunConfig& config,
                      std::uint64_t seed);

struct PairwiseWelch {
  Method a;
  Method b;
  WelchResult result;
};

struct ComparisonResult {
  std::vector<RunOutcome> runs;
  std::vector<RunSummary> summaries;
  std::vector<PairwiseWelch> tests;
};

/// `runs` seeded runs per method; run i uses seed config.seed + i for the
/// split, the initialization and the shuffling, so methods are paired.
ComparisonResult run_comparison(const Dataset& full, const RunConfig& config);

struct TimingRecord {
  Procedure procedure;
  std::string layer;
  std::size_t hidden_size = 0;
  double mean_seconds = 0.0;
  std::size_t repeats = 0;
};

/// Times every procedure of one ADMM iteration per hidden size, averaged
/// over `repeats` fresh initializations. Loading and initialization are
/// not timed.
std::vector<TimingRecord> run_bench(const Dataset& full, const RunConfig& config);

/// Reals are written with 6 significant digits.
std::string format_real(double v);

void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows);
void write_accuracies_csv(std::ostream& os, const std::vector<RunOutcome>& runs);
void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& summaries);
void write_welch_csv(std::ostream& os, const std::vector<PairwiseWelch>& tests);
void write_timing_csv(std::ostream& os, const std::vector<TimingRecord>& records);
/// Human-readable table of mean / STDV plus the t-test listings.
void write_comparison_report(std::ostream& os, const ComparisonResult& result);

/// Subcommand bodies. Return the process exit code: 0 success,
/// 1 validation error, 2 runtime error. Messages go to `err`.
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace admmnn
