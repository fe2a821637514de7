#include "admmnn/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "admmnn/baselines.hpp"

#ifndef ADMMNN_SOURCE_DATA_DIR
#define ADMMNN_SOURCE_DATA_DIR "data"
#endif

namespace admmnn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
  value = trim(value);
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ValidationError("--" + std::string(key) + ": expected a non-negative integer, got '" +
                          std::string(value) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  value = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ValidationError("--" + std::string(key) + ": expected a real number, got '" +
                          std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "1" || value == "true" || value == "yes" || value.empty()) return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ValidationError("--" + std::string(key) + ": expected true or false");
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool is_admm(Method m) { return m == Method::admm_lsmr || m == Method::admm_direct; }

std::string layer_role(std::size_t layer, std::size_t layers) {
  if (layer == layers) return "output";
  if (layer == 1) return "input";
  if (layers == 3) return "hidden";
  return "hidden" + std::to_string(layer);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

std::filesystem::path sibling(const std::filesystem::path& path, std::string_view suffix) {
  std::filesystem::path out = path;
  out.replace_extension();
  out += suffix;
  return out;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::admm_lsmr: return "admm-lsmr";
    case Method::admm_direct: return "admm-direct";
    case Method::sgd: return "sgd";
    case Method::adam: return "adam";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  name = trim(name);
  if (name == "admm-lsmr") return Method::admm_lsmr;
  if (name == "admm-direct") return Method::admm_direct;
  if (name == "sgd") return Method::sgd;
  if (name == "adam") return Method::adam;
  throw ValidationError("unknown method '" + std::string(name) +
                        "' (expected admm-lsmr, admm-direct, sgd or adam)");
}

void RunConfig::validate(Command command) const {
  if (methods.empty()) throw ValidationError("no method given");
  if (command == Command::train && methods.size() != 1) {
    throw ValidationError("train takes exactly one --method");
  }
  if (preset.empty() && data.empty()) throw ValidationError("give --preset or --data");
  if (layers == 0) throw ValidationError("--layers must be at least 1");
  if (hidden_size == 0) throw ValidationError("--hidden-size must be at least 1");
  if (batch_size == 0) throw ValidationError("--batch-size must be at least 1");
  if (!(gamma > 0.0)) throw ValidationError("--gamma must be positive");
  if (!(beta > 0.0)) throw ValidationError("--beta must be positive");
  if (!(init_std > 0.0)) throw ValidationError("--init-std must be positive");
  if (!(lsmr_atol >= 0.0) || !(lsmr_btol >= 0.0)) {
    throw ValidationError("--lsmr-atol and --lsmr-btol must be non-negative");
  }
  if (lsmr_max_iters && *lsmr_max_iters == 0) {
    throw ValidationError("--lsmr-max-iters must be at least 1 (or auto)");
  }
  if (!(sgd_lr > 0.0) || !(adam_lr > 0.0)) throw ValidationError("learning rates must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("--test-fraction must lie in (0, 1)");
  }
  const bool any_admm = std::any_of(methods.begin(), methods.end(), is_admm);
  if (any_admm && iters == 0) throw ValidationError("--iters must be at least 1");
  if (command == Command::compare && runs < 2) {
    throw ValidationError("--runs must be at least 2 for a comparison");
  }
  if (command == Command::bench) {
    if (hidden_sizes.empty()) throw ValidationError("--hidden-sizes must list at least one size");
    for (std::size_t h : hidden_sizes) {
      if (h == 0) throw ValidationError("--hidden-sizes entries must be positive");
    }
    if (repeats == 0) throw ValidationError("--repeats must be at least 1");
    if (methods.size() != 1 || !is_admm(methods.front())) {
      throw ValidationError("bench times the ADMM procedures; use --method admm-lsmr or admm-direct");
    }
  }
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  if (key.starts_with("--")) key.remove_prefix(2);
  const std::string v(trim(value));

  if (key == "method") {
    c.methods.clear();
    for (auto item : split_list(v)) c.methods.push_back(parse_method(item));
    if (c.methods.empty()) throw ValidationError("--method: empty list");
  } else if (key == "preset") {
    apply_preset(c, v);
  } else if (key == "data") {
    c.data = v;
  } else if (key == "label-column") {
    c.label_column = v;
  } else if (key == "header") {
    c.header = parse_bool(key, v);
  } else if (key == "max-rows") {
    c.max_rows = parse_integer<std::size_t>(key, v);
  } else if (key == "layers") {
    c.layers = parse_integer<std::size_t>(key, v);
  } else if (key == "hidden-size") {
    c.hidden_size = parse_integer<std::size_t>(key, v);
  } else if (key == "iters") {
    c.iters = parse_integer<std::size_t>(key, v);
  } else if (key == "epochs") {
    c.epochs = parse_integer<std::size_t>(key, v);
  } else if (key == "batch-size") {
    c.batch_size = parse_integer<std::size_t>(key, v);
  } else if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(key, v);
  } else if (key == "runs") {
    c.runs = parse_integer<std::size_t>(key, v);
  } else if (key == "gamma") {
    c.gamma = parse_double(key, v);
  } else if (key == "beta") {
    c.beta = parse_double(key, v);
  } else if (key == "init-std") {
    c.init_std = parse_double(key, v);
  } else if (key == "lsmr-atol") {
    c.lsmr_atol = parse_double(key, v);
  } else if (key == "lsmr-btol") {
    c.lsmr_btol = parse_double(key, v);
  } else if (key == "lsmr-max-iters") {
    if (v == "auto") {
      c.lsmr_max_iters.reset();
    } else {
      c.lsmr_max_iters = parse_integer<std::size_t>(key, v);
    }
  } else if (key == "sgd-lr") {
    c.sgd_lr = parse_double(key, v);
  } else if (key == "adam-lr") {
    c.adam_lr = parse_double(key, v);
  } else if (key == "test-fraction") {
    c.test_fraction = parse_double(key, v);
  } else if (key == "hidden-sizes") {
    c.hidden_sizes.clear();
    for (auto item : split_list(v)) c.hidden_sizes.push_back(parse_integer<std::size_t>(key, item));
  } else if (key == "repeats") {
    c.repeats = parse_integer<std::size_t>(key, v);
  } else if (key == "out") {
    c.out = v;
  } else {
    throw ValidationError("unknown setting '" + std::string(key) + "'");
  }
}

void apply_preset(RunConfig& c, std::string_view name) {
  c.gamma = 10.0;
  c.beta = 1.0;
  c.iters = 50;
  // One epoch per ADMM iteration: both see the training set the same number of times.
  c.epochs = c.iters;
  c.test_fraction = 0.2;
  if (name == "iris") {
    c.preset = "iris";
    c.label_column = "species";
    c.header = true;
    c.max_rows.reset();
    c.layers = 3;
    c.hidden_size = 8;
  } else if (name == "higgs-subset") {
    c.preset = "higgs-subset";
    c.label_column = "0";
    c.header = false;
    c.max_rows = 20000;
    c.layers = 4;
    c.hidden_size = 28;
  } else if (name == "blobs") {
    // Small separable fixture; one hidden layer trains quickly with either family.
    c.preset = "blobs";
    c.layers = 2;
    c.hidden_size = 8;
    c.epochs = 200;
  } else {
    throw ValidationError("unknown preset '" + std::string(name) +
                          "' (expected iris, higgs-subset or blobs)");
  }
}

RunConfig build_config(const std::vector<std::pair<std::string, std::string>>& settings) {
  RunConfig c;
  for (const auto& [k, v] : settings) {
    if (trim(k) == "preset" || trim(k) == "--preset") apply_setting(c, k, v);
  }
  for (const auto& [k, v] : settings) {
    if (trim(k) != "preset" && trim(k) != "--preset") apply_setting(c, k, v);
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected key=value");
    }
    out.emplace_back(std::string(trim(t.substr(0, eq))), std::string(trim(t.substr(eq + 1))));
  }
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("ADMMNN_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ADMMNN_SOURCE_DATA_DIR;
}

Dataset load_experiment_data(const RunConfig& config) {
  if (config.preset == "blobs" && config.data.empty()) {
    return synthetic_blobs(50, 4, 3, 6.0, 0);
  }
  std::filesystem::path path = config.data;
  if (path.empty()) {
    if (config.preset == "iris") path = default_data_dir() / "iris.csv";
    if (config.preset == "higgs-subset") path = default_data_dir() / "HIGGS.csv";
  }
  CsvSchema schema;
  schema.header = config.header;
  schema.max_rows = config.max_rows;
  const std::string_view label = config.label_column;
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), index);
  if (ec == std::errc{} && ptr == label.data() + label.size()) {
    schema.label_column = index;
  } else {
    schema.label_column = std::string(label);
    schema.header = true;
  }
  Dataset ds = load_csv(path, schema);
  if (!config.preset.empty()) ds.name = config.preset;
  return ds;
}

StandardizedSplit prepare_split(const Dataset& full, const RunConfig& config, std::uint64_t seed) {
  auto [train, test] = train_test_split(full, SplitSpec{config.test_fraction, seed, true});
  return standardize(train, test);
}

std::vector<std::size_t> network_dims(const RunConfig& config, std::size_t inputs,
                                      std::size_t hidden_size, std::size_t outputs) {
  std::vector<std::size_t> dims{inputs};
  for (std::size_t l = 1; l < config.layers; ++l) dims.push_back(hidden_size);
  dims.push_back(outputs);
  return dims;
}

HyperParams admm_hyperparams(const RunConfig& config, Method method, std::uint64_t seed) {
  HyperParams hp = HyperParams::uniform(config.layers, config.gamma, config.beta);
  hp.init_std = config.init_std;
  hp.seed = seed;
  hp.admm_iters = config.iters;
  if (method == Method::admm_direct) {
    hp.solver = DirectSolver{};
  } else {
    hp.solver = LsmrParams{config.lsmr_atol, config.lsmr_btol, config.lsmr_max_iters, false};
  }
  return hp;
}

RunOutcome run_single(Method method, const Dataset& full, const RunConfig& config,
                      std::uint64_t seed) {
  const StandardizedSplit split = prepare_split(full, config, seed);
  const auto dims = network_dims(config, full.feature_count(), config.hidden_size,
                                 full.class_count());
  const LabeledData train{split.train.features, split.train.one_hot, split.train.labels};
  const LabeledData test{split.test.features, split.test.one_hot, split.test.labels};

  RunOutcome out;
  out.method = method;
  out.seed = seed;
  if (is_admm(method)) {
    const AdmmResult r = train_admm(dims, train, admm_hyperparams(config, method, seed), test);
    for (const auto& it : r.report.iterations) {
      out.metrics.push_back({it.iteration, it.lagrangian, it.train_accuracy, it.constraint_residual});
    }
    out.train_accuracy = r.report.iterations.back().train_accuracy;
    out.test_accuracy = *r.report.test_accuracy;
    return out;
  }

  BaselineOptions opt;
  if (method == Method::sgd) {
    opt.optimizer.kind = SgdConfig{config.sgd_lr};
  } else {
    AdamConfig adam;
    adam.lr = config.adam_lr;
    opt.optimizer.kind = adam;
  }
  opt.epochs = config.epochs;
  opt.batch_size = config.batch_size;
  opt.seed = seed;
  opt.init_std = config.init_std;
  const BaselineResult r = train_baseline(dims, train, opt);
  for (const auto& e : r.epochs) {
    out.metrics.push_back({e.epoch, e.loss, e.train_accuracy, std::nullopt});
  }
  out.train_accuracy = accuracy(predict(r.weights, train.features, ActivationKind::relu), train.labels);
  out.test_accuracy = accuracy(predict(r.weights, test.features, ActivationKind::relu), test.labels);
  return out;
}

ComparisonResult run_comparison(const Dataset& full, const RunConfig& config) {
  ComparisonResult result;
  std::vector<std::vector<double>> per_method(config.methods.size());
  for (std::size_t run = 0; run < config.runs; ++run) {
    const std::uint64_t seed = config.seed + run;
    for (std::size_t k = 0; k < config.methods.size(); ++k) {
      result.runs.push_back(run_single(config.methods[k], full, config, seed));
      per_method[k].push_back(result.runs.back().test_accuracy);
    }
  }
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    result.summaries.push_back(summarize(std::string(to_string(config.methods[k])), per_method[k]));
  }
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < config.methods.size(); ++j) {
      result.tests.push_back(
          {config.methods[i], config.methods[j], welch_t_test(per_method[i], per_method[j])});
    }
  }
  return result;
}

std::vector<TimingRecord> run_bench(const Dataset& full, const RunConfig& config) {
  const StandardizedSplit split = prepare_split(full, config, config.seed);
  const Method method = config.methods.front();
  std::vector<TimingRecord> records;
  for (std::size_t hidden : config.hidden_sizes) {
    const auto dims =
        network_dims(config, full.feature_count(), hidden, full.class_count());
    const std::size_t first = records.size();
    for (std::size_t rep = 0; rep < config.repeats; ++rep) {
      const HyperParams hp = admm_hyperparams(config, method, config.seed + rep);
      const NetworkState state = init_state(dims, split.train.features, hp);
      std::size_t slot = first;
      auto observer = [&](Procedure proc, std::size_t layer, std::chrono::nanoseconds elapsed) {
        if (rep == 0) {
          records.push_back({proc, layer_role(layer, config.layers), hidden, 0.0, config.repeats});
        }
        records[slot++].mean_seconds += std::chrono::duration<double>(elapsed).count();
      };
      (void)train_iteration(state, split.train.one_hot, hp, observer);
    }
    for (std::size_t i = first; i < records.size(); ++i) {
      records[i].mean_seconds /= static_cast<double>(config.repeats);
    }
  }
  return records;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << "iteration,objective,train_accuracy,constraint_residual\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << format_real(r.objective) << ',' << format_real(r.train_accuracy)
       << ',';
    if (r.constraint_residual) os << format_real(*r.constraint_residual);
    os << '\n';
  }
}

void write_accuracies_csv(std::ostream& os, const std::vector<RunOutcome>& runs) {
  os << "run,seed,method,test_accuracy\n";
  // Runs are stored run-major; the run index is the seed offset.
  std::uint64_t base = runs.empty() ? 0 : runs.front().seed;
  for (const auto& r : runs) {
    os << (r.seed - base) << ',' << r.seed << ',' << to_string(r.method) << ','
       << format_real(r.test_accuracy) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<RunSummary>& summaries) {
  os << "method,runs,mean,std\n";
  for (const auto& s : summaries) {
    os << s.method << ',' << s.accuracies.size() << ',' << format_real(s.mean) << ','
       << format_real(s.std) << '\n';
  }
}

void write_welch_csv(std::ostream& os, const std::vector<PairwiseWelch>& tests) {
  os << "method_a,method_b,t,df,p_value,ci99_lo,ci99_hi,mean_a,mean_b\n";
  for (const auto& w : tests) {
    const auto& r = w.result;
    os << to_string(w.a) << ',' << to_string(w.b) << ',' << format_real(r.t) << ','
       << format_real(r.df) << ',' << format_real(r.p_two_sided) << ',' << format_real(r.ci99_lo)
       << ',' << format_real(r.ci99_hi) << ',' << format_real(r.mean_a) << ','
       << format_real(r.mean_b) << '\n';
  }
}

void write_timing_csv(std::ostream& os, const std::vector<TimingRecord>& records) {
  os << "procedure,layer,hidden_size,mean_seconds,repeats\n";
  for (const auto& r : records) {
    os << to_string(r.procedure) << ',' << r.layer << ',' << r.hidden_size << ','
       << format_real(r.mean_seconds) << ',' << r.repeats << '\n';
  }
}

void write_comparison_report(std::ostream& os, const ComparisonResult& result) {
  os << std::left << std::setw(14) << "" << std::setw(10) << "Mean" << "STDV\n";
  for (const auto& s : result.summaries) {
    char line[128];
    std::snprintf(line, sizeof line, "%-14s%-10.4f%.4f%s\n", s.method.c_str(), s.mean, s.std,
                  s.degenerate ? "  (single run)" : "");
    os << line;
  }
  for (const auto& w : result.tests) {
    const auto& r = w.result;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "\n\tWelch Two Sample t-test\n"
                  "data:  %s and %s\n"
                  "t = %.5g, df = %.5g, p-value = %.4g\n"
                  "alternative hypothesis: true difference in means is not equal to 0\n"
                  "99 percent confidence interval:\n %.10g %.10g\n"
                  "sample estimates:\nmean of x mean of y\n%.7f %.7f\n",
                  std::string(to_string(w.a)).c_str(), std::string(to_string(w.b)).c_str(), r.t,
                  r.df, r.p_two_sided, r.ci99_lo, r.ci99_hi, r.mean_a, r.mean_b);
    os << buf;
  }
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate(Command::train);
    const Dataset full = load_experiment_data(config);
    const Method method = config.methods.front();
    const RunOutcome run = run_single(method, full, config, config.seed);
    const auto path = config.out.empty() ? std::filesystem::path("metrics.csv") : config.out;
    {
      auto os = open_output(path);
      write_metrics_csv(os, run.metrics);
    }
    out << "summary method=" << to_string(method) << " seed=" << config.seed
        << " train_accuracy=" << format_real(run.train_accuracy)
        << " test_accuracy=" << format_real(run.test_accuracy) << " metrics=" << path.string()
        << '\n';
    return 0;
  });
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate(Command::compare);
    const Dataset full = load_experiment_data(config);
    const ComparisonResult result = run_comparison(full, config);
    const auto path = config.out.empty() ? std::filesystem::path("accuracies.csv") : config.out;
    {
      auto os = open_output(path);
      write_accuracies_csv(os, result.runs);
    }
    {
      auto os = open_output(sibling(path, ".summary.csv"));
      write_summary_csv(os, result.summaries);
    }
    {
      auto os = open_output(sibling(path, ".welch.csv"));
      write_welch_csv(os, result.tests);
    }
    write_comparison_report(out, result);
    return 0;
  });
}

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate(Command::bench);
    const Dataset full = load_experiment_data(config);
    const auto records = run_bench(full, config);
    const auto path = config.out.empty() ? std::filesystem::path("timing.csv") : config.out;
    auto os = open_output(path);
    write_timing_csv(os, records);
    out << "wrote " << records.size() << " timing records to " << path.string() << '\n';
    return 0;
  });
}

}  // namespace admmnn
