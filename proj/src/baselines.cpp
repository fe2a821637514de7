#include "admmnn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "admmnn/random.hpp"

namespace admmnn {

namespace {

constexpr std::uint64_t kShuffleStream = 1;

void require_same_layers(const MlpState& state, std::span<const DenseMatrix> grads) {
  if (grads.size() != state.weights.size()) {
    throw DimensionError("optimizer step: " + std::to_string(grads.size()) + " gradients for " +
                         std::to_string(state.weights.size()) + " layers");
  }
  for (std::size_t l = 0; l < grads.size(); ++l) {
    if (grads[l].rows() != state.weights[l].rows() || grads[l].cols() != state.weights[l].cols()) {
      throw DimensionError("optimizer step: gradient " + grads[l].shape_string() +
                           " for weight " + state.weights[l].shape_string());
    }
  }
}

}  // namespace

void OptimizerConfig::validate() const {
  if (const auto* sgd = std::get_if<SgdConfig>(&kind)) {
    if (!(sgd->lr > 0.0)) throw std::invalid_argument("sgd: lr must be positive");
    return;
  }
  const auto& adam = std::get<AdamConfig>(kind);
  if (!(adam.lr > 0.0)) throw std::invalid_argument("adam: lr must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw std::invalid_argument("adam: beta1 and beta2 must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw std::invalid_argument("adam: eps must be positive");
}

MlpState MlpState::create(std::vector<DenseMatrix> weights, OptimizerConfig optimizer) {
  optimizer.validate();
  MlpState s;
  s.weights = std::move(weights);
  s.optimizer = optimizer;
  if (std::holds_alternative<AdamConfig>(optimizer.kind)) {
    for (const auto& w : s.weights) {
      s.m.emplace_back(w.rows(), w.cols());
      s.v.emplace_back(w.rows(), w.cols());
    }
  }
  return s;
}

ForwardCache forward_cache(const MlpState& state, const DenseMatrix& x0) {
  if (state.weights.empty()) throw std::invalid_argument("forward_cache: no layers");
  ForwardCache cache;
  cache.inputs.push_back(x0);
  const std::size_t L = state.weights.size();
  for (std::size_t l = 0; l < L; ++l) {
    cache.preactivations.push_back(matmul(state.weights[l], cache.inputs.back()));
    if (l + 1 < L) {
      cache.inputs.push_back(apply_activation(ActivationKind::relu, cache.preactivations.back()));
    }
  }
  return cache;
}

std::vector<DenseMatrix> backward(const MlpState& state, const ForwardCache& cache,
                                  const DenseMatrix& y, LossKind loss) {
  if (loss != LossKind::squared) throw std::invalid_argument("backward: unsupported loss");
  const std::size_t L = state.weights.size();
  if (cache.preactivations.size() != L || cache.inputs.size() != L) {
    throw DimensionError("backward: cache does not match the network depth");
  }
  const DenseMatrix& out = cache.output();
  if (out.rows() != y.rows() || out.cols() != y.cols()) {
    throw DimensionError("backward: output " + out.shape_string() + " vs target " +
                         y.shape_string());
  }

  std::vector<DenseMatrix> grads(L);
  DenseMatrix delta = 2.0 * (out - y);
  for (std::size_t l = L; l-- > 0;) {
    grads[l] = matmul(delta, transpose(cache.inputs[l]));
    if (l == 0) break;
    delta = matmul_transposed_left(state.weights[l], delta);
    const DenseMatrix& z = cache.preactivations[l - 1];
    auto dv = delta.values();
    auto zv = z.values();
    for (std::size_t i = 0; i < dv.size(); ++i) {
      if (!(zv[i] > 0.0)) dv[i] = 0.0;
    }
  }
  return grads;
}

MlpState sgd_step(const MlpState& state, std::span<const DenseMatrix> grads) {
  require_same_layers(state, grads);
  const auto* cfg = std::get_if<SgdConfig>(&state.optimizer.kind);
  if (cfg == nullptr) throw std::invalid_argument("sgd_step: optimizer is not SGD");
  MlpState next = state;
  for (std::size_t l = 0; l < grads.size(); ++l) {
    auto w = next.weights[l].values();
    auto g = grads[l].values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg->lr * g[i];
  }
  ++next.step_count;
  return next;
}

MlpState adam_step(const MlpState& state, std::span<const DenseMatrix> grads) {
  require_same_layers(state, grads);
  const auto* cfg = std::get_if<AdamConfig>(&state.optimizer.kind);
  if (cfg == nullptr) throw std::invalid_argument("adam_step: optimizer is not Adam");
  MlpState next = state;
  ++next.step_count;
  const double t = static_cast<double>(next.step_count);
  const double correction1 = 1.0 - std::pow(cfg->beta1, t);
  const double correction2 = 1.0 - std::pow(cfg->beta2, t);
  for (std::size_t l = 0; l < grads.size(); ++l) {
    auto w = next.weights[l].values();
    auto m = next.m[l].values();
    auto v = next.v[l].values();
    auto g = grads[l].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg->beta1 * m[i] + (1.0 - cfg->beta1) * g[i];
      v[i] = cfg->beta2 * v[i] + (1.0 - cfg->beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= cfg->lr * m_hat / (std::sqrt(v_hat) + cfg->eps);
    }
  }
  return next;
}

MlpState optimizer_step(const MlpState& state, std::span<const DenseMatrix> grads) {
  if (std::holds_alternative<SgdConfig>(state.optimizer.kind)) return sgd_step(state, grads);
  return adam_step(state, grads);
}

BaselineResult train_baseline(std::span<const std::size_t> dims, const LabeledData& train,
                              const BaselineOptions& options) {
  const std::size_t n = train.labels.size();
  if (n == 0) throw std::invalid_argument("train_baseline: no samples");
  if (train.features.cols() != n || train.one_hot.cols() != n) {
    throw DimensionError("train_baseline: features, targets and labels disagree on N");
  }
  if (dims.empty() || train.features.rows() != dims.front() || train.one_hot.rows() != dims.back()) {
    throw DimensionError("train_baseline: dims do not match the data");
  }
  const std::size_t batch = std::clamp<std::size_t>(options.batch_size, 1, n);

  MlpState state =
      MlpState::create(init_weights(dims, options.seed, options.init_std), options.optimizer);
  SeededRng shuffle_rng(derive_seed(options.seed, kShuffleStream));

  BaselineResult result;
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto order = random_permutation(shuffle_rng, n);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::span<const std::size_t> cols(order.data() + start, stop - start);
      const DenseMatrix xb = train.features.select_columns(cols);
      const DenseMatrix yb = train.one_hot.select_columns(cols);
      const ForwardCache cache = forward_cache(state, xb);
      auto grads = backward(state, cache, yb);
      const double scale = 1.0 / static_cast<double>(cols.size());
      for (auto& g : grads) g = scale * g;
      state = optimizer_step(state, grads);
    }
    const DenseMatrix out = predict(state.weights, train.features, ActivationKind::relu);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = evaluate_loss(LossKind::squared, out, train.one_hot) / static_cast<double>(n);
    rec.train_accuracy = accuracy(out, train.labels);
    result.epochs.push_back(rec);
  }
  result.weights = std::move(state.weights);
  return result;
}

}  // namespace admmnn
