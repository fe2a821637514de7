#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "admmnn/harness.hpp"

namespace {

struct FlagSet {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  CLI::Option* header = nullptr;
  std::string config_path;
};

void add_flag(CLI::App& app, FlagSet& flags, const std::string& name, const std::string& help) {
  auto* opt = app.add_option("--" + name, flags.values[name], help);
  flags.options.emplace_back(name, opt);
}

void add_common_flags(CLI::App& app, FlagSet& flags) {
  app.add_option("--config", flags.config_path, "key=value settings file; flags override it");
  add_flag(app, flags, "method", "admm-lsmr, admm-direct, sgd or adam (comma list for compare)");
  add_flag(app, flags, "preset", "iris, higgs-subset or blobs");
  add_flag(app, flags, "data", "CSV file with one sample per row");
  add_flag(app, flags, "label-column", "label column index or header name");
  flags.header = app.add_flag("--header", "CSV has a header line");
  add_flag(app, flags, "max-rows", "read at most this many rows");
  add_flag(app, flags, "layers", "number of weight layers");
  add_flag(app, flags, "hidden-size", "width of every hidden layer");
  add_flag(app, flags, "iters", "ADMM iterations");
  add_flag(app, flags, "epochs", "baseline epochs");
  add_flag(app, flags, "batch-size", "baseline mini-batch size");
  add_flag(app, flags, "seed", "base seed");
  add_flag(app, flags, "gamma", "activation penalty for every layer");
  add_flag(app, flags, "beta", "constraint penalty for every layer");
  add_flag(app, flags, "init-std", "std of the Gaussian initialization");
  add_flag(app, flags, "lsmr-atol", "LSMR atol");
  add_flag(app, flags, "lsmr-btol", "LSMR btol");
  add_flag(app, flags, "lsmr-max-iters", "LSMR iteration cap, or auto");
  add_flag(app, flags, "sgd-lr", "SGD learning rate");
  add_flag(app, flags, "adam-lr", "Adam learning rate");
  add_flag(app, flags, "test-fraction", "held-out fraction in (0, 1)");
  add_flag(app, flags, "out", "output CSV path");
}

admmnn::RunConfig resolve(const FlagSet& flags) {
  std::vector<std::pair<std::string, std::string>> settings;
  if (!flags.config_path.empty()) settings = admmnn::read_config_file(flags.config_path);
  for (const auto& [name, opt] : flags.options) {
    if (opt->count() > 0) settings.emplace_back(name, flags.values.at(name));
  }
  if (flags.header->count() > 0) settings.emplace_back("header", "true");
  return admmnn::build_config(settings);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ADMM and LSMR neural network training"};
  app.require_subcommand(1);

  FlagSet train_flags, compare_flags, bench_flags;
  auto* train = app.add_subcommand("train", "train one network and write per-iteration metrics");
  add_common_flags(*train, train_flags);

  auto* compare = app.add_subcommand("compare", "repeated seeded runs with Welch t-tests");
  add_common_flags(*compare, compare_flags);
  add_flag(*compare, compare_flags, "runs", "runs per method");

  auto* bench = app.add_subcommand("bench", "time each ADMM procedure across hidden sizes");
  add_common_flags(*bench, bench_flags);
  add_flag(*bench, bench_flags, "hidden-sizes", "comma list of hidden sizes");
  add_flag(*bench, bench_flags, "repeats", "timed iterations per hidden size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return admmnn::cmd_train(resolve(train_flags), std::cout, std::cerr);
    if (compare->parsed()) return admmnn::cmd_compare(resolve(compare_flags), std::cout, std::cerr);
    return admmnn::cmd_bench(resolve(bench_flags), std::cout, std::cerr);
  } catch (const admmnn::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
