#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "admmnn/linalg.hpp"
#include "admmnn/lsmr.hpp"

namespace admmnn {

enum class ActivationKind { relu };
enum class LossKind { squared };

double apply_activation(ActivationKind kind, double z);
DenseMatrix apply_activation(ActivationKind kind, const DenseMatrix& z);

/// Dense normal-equation / Cholesky backend.
struct DirectSolver {};
using SolverConfig = std::variant<LsmrParams, DirectSolver>;

struct HyperParams {
  /// Per-layer penalties, index l - 1 for layer l. gamma[L - 1] is unused
  /// by the updates but must still be positive.
  std::vector<double> gamma;
  std::vector<double> beta;
  ActivationKind activation = ActivationKind::relu;
  LossKind loss = LossKind::squared;
  double init_std = 0.1;
  std::uint64_t seed = 0;
  std::size_t admm_iters = 50;
  SolverConfig solver = LsmrParams{};

  /// Same gamma and beta on every one of `layers` layers.
  static HyperParams uniform(std::size_t layers, double gamma, double beta);

  void validate(std::size_t layers) const;
};

/// ADMM variables for an L-layer network on N samples.
///
/// weights[l-1] = W_l (dims[l] x dims[l-1]), activations[l] = x_l for
/// l = 0..L-1 (x_0 is the input data), preactivations[l-1] = z_l for
/// l = 1..L, lambda has the shape of z_L.
struct NetworkState {
  std::vector<std::size_t> dims;
  std::vector<DenseMatrix> weights;
  std::vector<DenseMatrix> activations;
  std::vector<DenseMatrix> preactivations;
  DenseMatrix lambda;

  std::size_t layers() const noexcept { return weights.size(); }
  std::size_t samples() const noexcept { return activations.empty() ? 0 : activations[0].cols(); }

  /// Throws DimensionError if any shape disagrees with dims and N.
  void check_consistent() const;

  bool operator==(const NetworkState&) const = default;
};

/// Gaussian weights for the given layer sizes; the first draws of the
/// stream seeded with `seed`. Shared with the backprop baselines.
std::vector<DenseMatrix> init_weights(std::span<const std::size_t> dims, std::uint64_t seed,
                                      double std);

/// W, then x_1..x_{L-1}, then z_1..z_L, all from one stream seeded with
/// hp.seed; lambda = 0.
NetworkState init_state(std::span<const std::size_t> dims, const DenseMatrix& data,
                        const HyperParams& hp);

/// Least-squares W minimizing ||W x_prev - z||_F, one solve per row of z.
DenseMatrix weight_update(const DenseMatrix& z, const DenseMatrix& x_prev,
                          const SolverConfig& solver);

/// Minimizer of beta ||z_next - W_next x||^2 + gamma ||x - h(z)||^2, one
/// SPD solve per sample column.
DenseMatrix activation_update(const DenseMatrix& w_next, const DenseMatrix& z_next,
                              const DenseMatrix& z, double gamma, double beta_next,
                              ActivationKind activation, const SolverConfig& solver);

/// Element-wise minimizer of gamma (a - h(z))^2 + beta (z - w)^2 for ReLU.
double output_update_scalar(double a, double w, double gamma, double beta);

/// Element-wise minimizer of gamma ||x - h(z)||^2 + beta ||z - w_term||^2.
DenseMatrix output_update(const DenseMatrix& x, const DenseMatrix& w_term, double gamma,
                          double beta, ActivationKind activation);

/// Minimizer of loss(z, y) + beta ||z - w_term||^2 + <lambda, z>.
DenseMatrix last_output_update(const DenseMatrix& y, const DenseMatrix& w_term,
                               const DenseMatrix& lambda, double beta, LossKind loss);

DenseMatrix lagrangian_update(const DenseMatrix& lambda, const DenseMatrix& z_last,
                              const DenseMatrix& w_term, double beta_last);

double evaluate_loss(LossKind loss, const DenseMatrix& z, const DenseMatrix& y);

/// Augmented Lagrangian with the single output-layer multiplier.
double evaluate_lagrangian(const NetworkState& state, const DenseMatrix& y,
                           const HyperParams& hp);

/// ||z_L - W_L x_{L-1}||_F
double constraint_residual(const NetworkState& state);

enum class Procedure {
  weight_update,
  activation_update,
  output_update,
  last_output_update,
  lagrangian_update,
};

std::string_view to_string(Procedure p);

/// Receives the wall time of each procedure during train_iteration.
/// `layer` is 1-based.
using ProcedureObserver =
    std::function<void(Procedure, std::size_t layer, std::chrono::nanoseconds elapsed)>;

/// One sweep of the ADMM updates: for l = 1..L-1 the weight, activation and
/// output updates, then W_L, z_L and lambda.
NetworkState train_iteration(const NetworkState& state, const DenseMatrix& y,
                             const HyperParams& hp, const ProcedureObserver& observer = {});

/// Forward pass: z_1 = W_1 x_0, x_l = h(z_l), output W_L x_{L-1}.
DenseMatrix predict(std::span<const DenseMatrix> weights, const DenseMatrix& x0,
                    ActivationKind activation);

/// Fraction of columns whose argmax row equals the label. Ties go to the
/// lowest row index.
double accuracy(const DenseMatrix& scores, std::span<const std::size_t> labels);

struct IterationRecord {
  std::size_t iteration = 0;
  double lagrangian = 0.0;
  double train_accuracy = 0.0;
  double constraint_residual = 0.0;
};

struct TrainReport {
  std::vector<IterationRecord> iterations;
  std::optional<double> test_accuracy;
};

struct LabeledData {
  const DenseMatrix& features;
  const DenseMatrix& one_hot;
  std::span<const std::size_t> labels;
};

struct AdmmResult {
  NetworkState state;
  TrainReport report;
};

/// Runs hp.admm_iters iterations from init_state, recording one report
/// entry per iteration. Accuracies come from predict on the learned weights.
AdmmResult train_admm(std::span<const std::size_t> dims, const LabeledData& train,
                      const HyperParams& hp, const std::optional<LabeledData>& test = {});

}  // namespace admmnn
