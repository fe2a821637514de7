#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "admmnn/admm.hpp"
#include "admmnn/linalg.hpp"

namespace admmnn {

struct SgdConfig {
  double lr = 1e-2;
};

/// Defaults are the ones published with the method.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerConfig {
  std::variant<SgdConfig, AdamConfig> kind = AdamConfig{};

  void validate() const;
};

/// ReLU hidden layers, linear output, no biases; same shapes as the ADMM
/// weights.
struct MlpState {
  std::vector<DenseMatrix> weights;
  OptimizerConfig optimizer;
  /// Adam first and second moments, one per weight matrix; empty for SGD.
  std::vector<DenseMatrix> m;
  std::vector<DenseMatrix> v;
  std::size_t step_count = 0;

  static MlpState create(std::vector<DenseMatrix> weights, OptimizerConfig optimizer);
};

struct ForwardCache {
  /// x_0 .. x_{L-1}
  std::vector<DenseMatrix> inputs;
  /// z_1 .. z_L
  std::vector<DenseMatrix> preactivations;

  const DenseMatrix& output() const { return preactivations.back(); }
};

ForwardCache forward_cache(const MlpState& state, const DenseMatrix& x0);

/// Gradients of loss(z_L, y) = ||z_L - y||_F^2 with respect to each weight.
/// The ReLU derivative at 0 is taken as 0.
std::vector<DenseMatrix> backward(const MlpState& state, const ForwardCache& cache,
                                  const DenseMatrix& y, LossKind loss = LossKind::squared);

MlpState sgd_step(const MlpState& state, std::span<const DenseMatrix> grads);
MlpState adam_step(const MlpState& state, std::span<const DenseMatrix> grads);
/// Dispatches on state.optimizer.
MlpState optimizer_step(const MlpState& state, std::span<const DenseMatrix> grads);

struct EpochRecord {
  std::size_t epoch = 0;
  /// Mean squared loss per sample on the full training set after the epoch.
  double loss = 0.0;
  double train_accuracy = 0.0;
};

struct BaselineResult {
  std::vector<DenseMatrix> weights;
  std::vector<EpochRecord> epochs;
};

struct BaselineOptions {
  OptimizerConfig optimizer;
  std::size_t epochs = 100;
  /// Clamped to the sample count.
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double init_std = 0.1;
};

/// Mini-batch training with a reshuffle every epoch. Each batch minimizes
/// the squared loss averaged over its samples.
BaselineResult train_baseline(std::span<const std::size_t> dims, const LabeledData& train,
                              const BaselineOptions& options);

}  // namespace admmnn
