#include "admmnn/admm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "admmnn/random.hpp"

namespace admmnn {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_shape(const DenseMatrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + m.shape_string());
  }
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  require_shape(b, a.rows(), a.cols(), what);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite, got " +
                                std::to_string(v));
  }
}

std::vector<DenseMatrix> draw_weights(SeededRng& rng, std::span<const std::size_t> dims,
                                      double std) {
  std::vector<DenseMatrix> weights;
  weights.reserve(dims.size() - 1);
  for (std::size_t l = 1; l < dims.size(); ++l) {
    weights.push_back(gaussian_matrix(rng, dims[l], dims[l - 1], std));
  }
  return weights;
}

void check_dims(std::span<const std::size_t> dims) {
  if (dims.size() < 2) throw std::invalid_argument("dims must list at least input and output sizes");
  for (std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

}  // namespace

double apply_activation(ActivationKind kind, double z) {
  switch (kind) {
    case ActivationKind::relu: return z > 0.0 ? z : 0.0;
  }
  throw std::invalid_argument("unsupported activation");
}

DenseMatrix apply_activation(ActivationKind kind, const DenseMatrix& z) {
  DenseMatrix out = z;
  for (double& v : out.values()) v = apply_activation(kind, v);
  return out;
}

HyperParams HyperParams::uniform(std::size_t layers, double gamma, double beta) {
  HyperParams hp;
  hp.gamma.assign(layers, gamma);
  hp.beta.assign(layers, beta);
  return hp;
}

void HyperParams::validate(std::size_t layers) const {
  if (gamma.size() != layers || beta.size() != layers) {
    throw std::invalid_argument("HyperParams: expected " + std::to_string(layers) +
                                " gamma and beta values, got " + std::to_string(gamma.size()) +
                                " and " + std::to_string(beta.size()));
  }
  for (double g : gamma) require_positive(g, "gamma");
  for (double b : beta) require_positive(b, "beta");
  require_positive(init_std, "init_std");
  if (const auto* p = std::get_if<LsmrParams>(&solver)) p->validate();
}

void NetworkState::check_consistent() const {
  const std::size_t L = layers();
  if (dims.size() != L + 1 || activations.size() != L || preactivations.size() != L) {
    throw DimensionError("NetworkState: variable counts disagree with dims");
  }
  const std::size_t n = samples();
  for (std::size_t l = 1; l <= L; ++l) {
    require_shape(weights[l - 1], dims[l], dims[l - 1], "NetworkState weight");
    require_shape(activations[l - 1], dims[l - 1], n, "NetworkState activation");
    require_shape(preactivations[l - 1], dims[l], n, "NetworkState pre-activation");
  }
  require_shape(lambda, dims[L], n, "NetworkState lambda");
}

std::vector<DenseMatrix> init_weights(std::span<const std::size_t> dims, std::uint64_t seed,
                                      double std) {
  check_dims(dims);
  SeededRng rng(seed);
  return draw_weights(rng, dims, std);
}

NetworkState init_state(std::span<const std::size_t> dims, const DenseMatrix& data,
                        const HyperParams& hp) {
  check_dims(dims);
  const std::size_t L = dims.size() - 1;
  hp.validate(L);
  if (data.rows() != dims[0]) {
    throw DimensionError("init_state: data has " + std::to_string(data.rows()) +
                         " features, dims[0] = " + std::to_string(dims[0]));
  }
  const std::size_t n = data.cols();
  if (n == 0) throw std::invalid_argument("init_state: no samples");

  SeededRng rng(hp.seed);
  NetworkState s;
  s.dims.assign(dims.begin(), dims.end());
  s.weights = draw_weights(rng, dims, hp.init_std);
  s.activations.push_back(data);
  for (std::size_t l = 1; l < L; ++l) {
    s.activations.push_back(gaussian_matrix(rng, dims[l], n, hp.init_std));
  }
  for (std::size_t l = 1; l <= L; ++l) {
    s.preactivations.push_back(gaussian_matrix(rng, dims[l], n, hp.init_std));
  }
  s.lambda = DenseMatrix(dims[L], n);
  return s;
}

DenseMatrix weight_update(const DenseMatrix& z, const DenseMatrix& x_prev,
                          const SolverConfig& solver) {
  const std::size_t n = z.cols();
  if (n == 0) throw std::invalid_argument("weight_update: no samples");
  if (x_prev.cols() != n) {
    throw DimensionError("weight_update: z is " + z.shape_string() + " but x_prev is " +
                         x_prev.shape_string());
  }
  const std::size_t m = z.rows();
  const std::size_t p = x_prev.rows();
  const DenseMatrix system = transpose(x_prev);  // N x p

  std::vector<Vector> rhs;
  rhs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) rhs.emplace_back(z.row(i).begin(), z.row(i).end());

  DenseMatrix w(m, p);
  std::visit(Overloaded{
                 [&](const LsmrParams& params) {
                   for (std::size_t i = 0; i < m; ++i) {
                     const Vector row = lsmr_solve(system, rhs[i], params).x;
                     std::copy(row.begin(), row.end(), w.row(i).begin());
                   }
                 },
                 [&](const DirectSolver&) {
                   const auto rows = solve_least_squares_direct_multi(system, rhs);
                   for (std::size_t i = 0; i < m; ++i) {
                     std::copy(rows[i].begin(), rows[i].end(), w.row(i).begin());
                   }
                 },
             },
             solver);
  return w;
}

DenseMatrix activation_update(const DenseMatrix& w_next, const DenseMatrix& z_next,
                              const DenseMatrix& z, double gamma, double beta_next,
                              ActivationKind activation, const SolverConfig& solver) {
  require_positive(gamma, "activation_update: gamma");
  require_positive(beta_next, "activation_update: beta");
  const std::size_t n = w_next.cols();
  const std::size_t samples = z.cols();
  require_shape(z, n, samples, "activation_update: z");
  require_shape(z_next, w_next.rows(), samples, "activation_update: z_next");

  // (gamma I + beta W^T W) x = gamma h(z) + beta W^T z_next
  DenseMatrix system = beta_next * matmul_transposed_left(w_next, w_next);
  for (std::size_t i = 0; i < n; ++i) system(i, i) += gamma;
  const DenseMatrix rhs =
      gamma * apply_activation(activation, z) + beta_next * matmul_transposed_left(w_next, z_next);

  DenseMatrix x(n, samples);
  std::visit(Overloaded{
                 [&](const LsmrParams& params) {
                   for (std::size_t j = 0; j < samples; ++j) {
                     x.set_column(j, lsmr_solve(system, rhs.column(j), params).x);
                   }
                 },
                 [&](const DirectSolver&) {
                   const CholeskyFactor factor(system);
                   for (std::size_t j = 0; j < samples; ++j) {
                     x.set_column(j, factor.solve(rhs.column(j)));
                   }
                 },
             },
             solver);
  return x;
}

double output_update_scalar(double a, double w, double gamma, double beta) {
  // Branch z >= 0: h(z) = z, a clamped quadratic.
  const double z_pos = std::max(0.0, (gamma * a + beta * w) / (gamma + beta));
  const double obj_pos = gamma * (a - z_pos) * (a - z_pos) + beta * (z_pos - w) * (z_pos - w);
  // Branch z <= 0: h(z) = 0.
  const double z_neg = std::min(0.0, w);
  const double obj_neg = gamma * a * a + beta * (z_neg - w) * (z_neg - w);
  return obj_neg < obj_pos ? z_neg : z_pos;
}

DenseMatrix output_update(const DenseMatrix& x, const DenseMatrix& w_term, double gamma,
                          double beta, ActivationKind activation) {
  require_positive(gamma, "output_update: gamma");
  require_positive(beta, "output_update: beta");
  require_same_shape(x, w_term, "output_update: w_term");
  if (activation != ActivationKind::relu) throw std::invalid_argument("output_update: unsupported activation");
  DenseMatrix z(x.rows(), x.cols());
  auto zv = z.values();
  auto xv = x.values();
  auto wv = w_term.values();
  for (std::size_t i = 0; i < zv.size(); ++i) zv[i] = output_update_scalar(xv[i], wv[i], gamma, beta);
  return z;
}

DenseMatrix last_output_update(const DenseMatrix& y, const DenseMatrix& w_term,
                               const DenseMatrix& lambda, double beta, LossKind loss) {
  require_positive(beta, "last_output_update: beta");
  require_same_shape(y, w_term, "last_output_update: w_term");
  require_same_shape(y, lambda, "last_output_update: lambda");
  if (loss != LossKind::squared) throw std::invalid_argument("last_output_update: unsupported loss");
  DenseMatrix z(y.rows(), y.cols());
  auto zv = z.values();
  auto yv = y.values();
  auto wv = w_term.values();
  auto lv = lambda.values();
  // Stationarity of (z - y)^2 + beta (z - w)^2 + lambda z.
  for (std::size_t i = 0; i < zv.size(); ++i) {
    zv[i] = (2.0 * yv[i] + 2.0 * beta * wv[i] - lv[i]) / (2.0 + 2.0 * beta);
  }
  return z;
}

DenseMatrix lagrangian_update(const DenseMatrix& lambda, const DenseMatrix& z_last,
                              const DenseMatrix& w_term, double beta_last) {
  return lambda + beta_last * (z_last - w_term);
}

double evaluate_loss(LossKind loss, const DenseMatrix& z, const DenseMatrix& y) {
  switch (loss) {
    case LossKind::squared: {
      const double r = frobenius_norm(z - y);
      return r * r;
    }
  }
  throw std::invalid_argument("unsupported loss");
}

double evaluate_lagrangian(const NetworkState& state, const DenseMatrix& y,
                           const HyperParams& hp) {
  state.check_consistent();
  const std::size_t L = state.layers();
  hp.validate(L);
  auto sq = [](double v) { return v * v; };

  double value = 0.0;
  for (std::size_t l = 1; l < L; ++l) {
    const DenseMatrix& z = state.preactivations[l - 1];
    value += hp.gamma[l - 1] *
             sq(frobenius_norm(state.activations[l] - apply_activation(hp.activation, z)));
    value += hp.beta[l - 1] *
             sq(frobenius_norm(z - matmul(state.weights[l - 1], state.activations[l - 1])));
  }
  const DenseMatrix& z_last = state.preactivations[L - 1];
  const DenseMatrix residual = z_last - matmul(state.weights[L - 1], state.activations[L - 1]);
  value += evaluate_loss(hp.loss, z_last, y);
  value += hp.beta[L - 1] * sq(frobenius_norm(residual));
  value += frobenius_dot(state.lambda, residual);
  return value;
}

double constraint_residual(const NetworkState& state) {
  const std::size_t L = state.layers();
  return frobenius_norm(state.preactivations[L - 1] -
                        matmul(state.weights[L - 1], state.activations[L - 1]));
}

std::string_view to_string(Procedure p) {
  switch (p) {
    case Procedure::weight_update: return "weight_update";
    case Procedure::activation_update: return "activation_update";
    case Procedure::output_update: return "output_update";
    case Procedure::last_output_update: return "last_output_update";
    case Procedure::lagrangian_update: return "lagrangian_update";
  }
  return "unknown";
}

NetworkState train_iteration(const NetworkState& state, const DenseMatrix& y,
                             const HyperParams& hp, const ProcedureObserver& observer) {
  state.check_consistent();
  const std::size_t L = state.layers();
  hp.validate(L);
  require_same_shape(state.preactivations[L - 1], y, "train_iteration: y");

  auto timed = [&](Procedure proc, std::size_t layer, auto&& step) {
    if (!observer) {
      step();
      return;
    }
    const auto start = std::chrono::steady_clock::now();
    step();
    observer(proc, layer, std::chrono::steady_clock::now() - start);
  };

  NetworkState s = state;
  auto& W = s.weights;
  auto& x = s.activations;
  auto& z = s.preactivations;

  for (std::size_t l = 1; l < L; ++l) {
    timed(Procedure::weight_update, l,
          [&] { W[l - 1] = weight_update(z[l - 1], x[l - 1], hp.solver); });
    timed(Procedure::activation_update, l, [&] {
      x[l] = activation_update(W[l], z[l], z[l - 1], hp.gamma[l - 1], hp.beta[l], hp.activation,
                               hp.solver);
    });
    timed(Procedure::output_update, l, [&] {
      z[l - 1] = output_update(x[l], matmul(W[l - 1], x[l - 1]), hp.gamma[l - 1],
                               hp.beta[l - 1], hp.activation);
    });
  }

  const double beta_last = hp.beta[L - 1];
  timed(Procedure::weight_update, L,
        [&] { W[L - 1] = weight_update(z[L - 1], x[L - 1], hp.solver); });
  timed(Procedure::last_output_update, L, [&] {
    z[L - 1] = last_output_update(y, matmul(W[L - 1], x[L - 1]), s.lambda, beta_last, hp.loss);
  });
  timed(Procedure::lagrangian_update, L, [&] {
    s.lambda = lagrangian_update(s.lambda, z[L - 1], matmul(W[L - 1], x[L - 1]), beta_last);
  });
  return s;
}

DenseMatrix predict(std::span<const DenseMatrix> weights, const DenseMatrix& x0,
                    ActivationKind activation) {
  if (weights.empty()) throw std::invalid_argument("predict: no layers");
  DenseMatrix a = x0;
  for (std::size_t l = 0; l + 1 < weights.size(); ++l) {
    a = apply_activation(activation, matmul(weights[l], a));
  }
  return matmul(weights.back(), a);
}

double accuracy(const DenseMatrix& scores, std::span<const std::size_t> labels) {
  if (scores.cols() != labels.size()) {
    throw DimensionError("accuracy: " + std::to_string(scores.cols()) + " score columns, " +
                         std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw std::invalid_argument("accuracy: no samples");
  std::size_t correct = 0;
  for (std::size_t j = 0; j < scores.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.rows(); ++i) {
      if (scores(i, j) > scores(best, j)) best = i;
    }
    if (best == labels[j]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

AdmmResult train_admm(std::span<const std::size_t> dims, const LabeledData& train,
                      const HyperParams& hp, const std::optional<LabeledData>& test) {
  AdmmResult result{init_state(dims, train.features, hp), {}};
  for (std::size_t it = 1; it <= hp.admm_iters; ++it) {
    result.state = train_iteration(result.state, train.one_hot, hp);
    IterationRecord rec;
    rec.iteration = it;
    rec.lagrangian = evaluate_lagrangian(result.state, train.one_hot, hp);
    rec.train_accuracy =
        accuracy(predict(result.state.weights, train.features, hp.activation), train.labels);
    rec.constraint_residual = constraint_residual(result.state);
    result.report.iterations.push_back(rec);
  }
  if (test) {
    result.report.test_accuracy =
        accuracy(predict(result.state.weights, test->features, hp.activation), test->labels);
  }
  return result;
}

}  // namespace admmnn
