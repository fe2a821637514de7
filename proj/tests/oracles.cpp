#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

using admmnn::SeededRng;

DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) s += a(i, t) * b(t, j);
      c(i, j) = s;
    }
  }
  return c;
}

namespace {

// Orthonormal columns by modified Gram-Schmidt on Gaussian draws.
DenseMatrix orthonormal_columns(SeededRng& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix q = admmnn::gaussian_matrix(rng, rows, cols, 1.0);
  for (std::size_t j = 0; j < cols; ++j) {
    Vector v = q.column(j);
    for (std::size_t k = 0; k < j; ++k) {
      const Vector u = q.column(k);
      double proj = 0.0;
      for (std::size_t i = 0; i < rows; ++i) proj += u[i] * v[i];
      for (std::size_t i = 0; i < rows; ++i) v[i] -= proj * u[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    q.set_column(j, v);
  }
  return q;
}

double vec_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double uniform(SeededRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.next_uniform(); }

double relu(double z) { return z > 0.0 ? z : 0.0; }

}  // namespace

DenseMatrix well_conditioned(SeededRng& rng, std::size_t m, std::size_t n, double cond) {
  const std::size_t k = std::min(m, n);
  const DenseMatrix u = orthonormal_columns(rng, m, k);
  const DenseMatrix v = orthonormal_columns(rng, n, k);
  DenseMatrix us = u;
  for (std::size_t j = 0; j < k; ++j) {
    const double s = k == 1 ? 1.0 : 1.0 + (cond - 1.0) * static_cast<double>(j) / static_cast<double>(k - 1);
    for (std::size_t i = 0; i < m; ++i) us(i, j) *= s;
  }
  return naive_matmul(us, admmnn::transpose(v));
}

SolverSuite run_solver_suite(std::uint64_t seed, std::size_t count, std::size_t cap_factor) {
  SeededRng rng(seed);
  SolverSuite out;
  admmnn::LsmrParams params;
  params.record_residuals = true;
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t n = 1 + rng.next_below(32);
    const std::size_t m = n + rng.next_below(33 - n);
    const DenseMatrix a = well_conditioned(rng, m, n, 10.0);
    const DenseMatrix bm = admmnn::gaussian_matrix(rng, m, 1, 1.0);
    const Vector b = bm.column(0);

    if (cap_factor > 0) params.max_iters = cap_factor * n;
    const Vector direct = admmnn::solve_least_squares_direct(a, b);
    const admmnn::LsmrResult it = admmnn::lsmr_solve(a, b, params);
    Vector diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = it.x[i] - direct[i];
    out.worst_relative_error =
        std::max(out.worst_relative_error, vec_norm(diff) / std::max(vec_norm(direct), 1e-300));

    const auto& h = it.report.residual_history;
    bool monotone = true;
    for (std::size_t k = 1; k < h.size(); ++k) {
      const double increase = h[k] - h[k - 1];
      // Rounding floor: a few ulps of the starting residual.
      if (increase > 1e-12 * h.front()) monotone = false;
      out.worst_increase = std::max(out.worst_increase, increase / h.front());
    }
    if (!monotone || h.empty()) ++out.non_monotone_traces;
    ++out.systems;
  }
  return out;
}

double output_objective(double z, double a, double w, double gamma, double beta) {
  return gamma * (a - relu(z)) * (a - relu(z)) + beta * (z - w) * (z - w);
}

double last_output_objective(double z, double y, double w, double lambda, double beta) {
  return (z - y) * (z - y) + beta * (z - w) * (z - w) + lambda * z;
}

ActivationGradient activation_gradient(const DenseMatrix& w_next, const DenseMatrix& z_next,
                                       const DenseMatrix& z, const DenseMatrix& x, double gamma,
                                       double beta) {
  const DenseMatrix r = naive_matmul(w_next, x) - z_next;
  const DenseMatrix g1 = (2.0 * beta) * naive_matmul(admmnn::transpose(w_next), r);
  const DenseMatrix hz = admmnn::map(z, relu);
  const DenseMatrix g2 = (2.0 * gamma) * (x - hz);
  ActivationGradient out;
  out.norm = admmnn::frobenius_norm(g1 + g2);
  out.scale = std::max(1.0, (2.0 * beta) * admmnn::frobenius_norm(naive_matmul(
                                               admmnn::transpose(w_next), z_next)) +
                                (2.0 * gamma) * admmnn::frobenius_norm(hz));
  return out;
}

UpdateSuite run_update_suite(std::uint64_t seed, std::size_t scalar_count,
                             std::size_t activation_count, std::size_t grid_points,
                             std::size_t cap_factor) {
  SeededRng rng(seed);
  UpdateSuite out;
  std::vector<double> grid(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    grid[i] = -10.0 + 20.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }

  for (std::size_t c = 0; c < scalar_count; ++c) {
    const double a = uniform(rng, -3.0, 3.0);
    const double w = uniform(rng, -3.0, 3.0);
    const double gamma = uniform(rng, 0.1, 10.0);
    const double beta = uniform(rng, 0.1, 10.0);
    const DenseMatrix z = admmnn::output_update(DenseMatrix(1, 1, a), DenseMatrix(1, 1, w), gamma,
                                                beta, admmnn::ActivationKind::relu);
    const double fz = output_objective(z(0, 0), a, w, gamma, beta);
    double best = std::numeric_limits<double>::infinity();
    for (double g : grid) best = std::min(best, output_objective(g, a, w, gamma, beta));
    if (best < fz - 1e-12 * std::max(1.0, std::abs(fz))) ++out.output_beaten;
    ++out.output_instances;
  }

  for (std::size_t c = 0; c < scalar_count; ++c) {
    const double y = uniform(rng, -3.0, 3.0);
    const double w = uniform(rng, -3.0, 3.0);
    const double lambda = uniform(rng, -3.0, 3.0);
    const double beta = uniform(rng, 0.1, 10.0);
    const DenseMatrix z =
        admmnn::last_output_update(DenseMatrix(1, 1, y), DenseMatrix(1, 1, w),
                                   DenseMatrix(1, 1, lambda), beta, admmnn::LossKind::squared);
    const double fz = last_output_objective(z(0, 0), y, w, lambda, beta);
    double best = std::numeric_limits<double>::infinity();
    for (double g : grid) best = std::min(best, last_output_objective(g, y, w, lambda, beta));
    if (best < fz - 1e-12 * std::max(1.0, std::abs(fz))) ++out.last_output_beaten;
    ++out.last_output_instances;
  }

  for (std::size_t c = 0; c < activation_count; ++c) {
    const std::size_t h = 1 + rng.next_below(12);
    const std::size_t next = 1 + rng.next_below(12);
    const std::size_t n = 1 + rng.next_below(20);
    const double gamma = uniform(rng, 0.1, 10.0);
    const double beta = uniform(rng, 0.1, 10.0);
    const DenseMatrix w = admmnn::gaussian_matrix(rng, next, h, 1.0);
    const DenseMatrix z_next = admmnn::gaussian_matrix(rng, next, n, 1.0);
    const DenseMatrix z = admmnn::gaussian_matrix(rng, h, n, 1.0);
    admmnn::LsmrParams lsmr;
    if (cap_factor > 0) lsmr.max_iters = cap_factor * h;
    const bool use_lsmr = c % 2 == 0;
    const admmnn::SolverConfig solver =
        use_lsmr ? admmnn::SolverConfig{lsmr} : admmnn::SolverConfig{admmnn::DirectSolver{}};
    const DenseMatrix x = admmnn::activation_update(w, z_next, z, gamma, beta,
                                                    admmnn::ActivationKind::relu, solver);
    const ActivationGradient g = activation_gradient(w, z_next, z, x, gamma, beta);
    double& worst = use_lsmr ? out.worst_activation_ratio_lsmr : out.worst_activation_ratio_direct;
    worst = std::max(worst, g.norm / g.scale);
    out.worst_activation_ratio = std::max(out.worst_activation_ratio, g.norm / g.scale);
    ++out.activation_instances;
  }
  return out;
}

GradientCheck run_gradient_check(std::uint64_t seed, double step) {
  const std::vector<std::size_t> dims{3, 5, 4, 2};
  constexpr std::size_t n = 6;
  SeededRng rng(seed);
  const DenseMatrix x0 = admmnn::gaussian_matrix(rng, dims.front(), n, 1.0);
  const DenseMatrix y = admmnn::gaussian_matrix(rng, dims.back(), n, 1.0);

  // Redraw weights until no pre-activation sits within reach of the ReLU kink.
  admmnn::MlpState state;
  for (std::uint64_t attempt = 0;; ++attempt) {
    state = admmnn::MlpState::create(admmnn::init_weights(dims, seed + 1000 * attempt, 1.0),
                                     admmnn::OptimizerConfig{admmnn::SgdConfig{}});
    const auto cache = admmnn::forward_cache(state, x0);
    bool clear = true;
    for (std::size_t l = 0; l + 1 < cache.preactivations.size(); ++l) {
      for (double z : cache.preactivations[l].values()) clear = clear && std::abs(z) > 1e-2;
    }
    if (clear) break;
  }

  auto loss = [&](const admmnn::MlpState& s) {
    const DenseMatrix out = admmnn::forward_cache(s, x0).output();
    double sum = 0.0;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      for (std::size_t j = 0; j < out.cols(); ++j) sum += (out(i, j) - y(i, j)) * (out(i, j) - y(i, j));
    }
    return sum;
  };

  const auto grads = admmnn::backward(state, admmnn::forward_cache(state, x0), y);
  GradientCheck out;
  for (std::size_t l = 0; l < state.weights.size(); ++l) {
    for (std::size_t i = 0; i < state.weights[l].rows(); ++i) {
      for (std::size_t j = 0; j < state.weights[l].cols(); ++j) {
        admmnn::MlpState plus = state;
        admmnn::MlpState minus = state;
        plus.weights[l](i, j) += step;
        minus.weights[l](i, j) -= step;
        const double fd = (loss(plus) - loss(minus)) / (2.0 * step);
        const double g = grads[l](i, j);
        const double denom = std::max(std::abs(g), std::abs(fd));
        const double rel = denom == 0.0 ? 0.0 : std::abs(g - fd) / denom;
        out.worst_relative_error = std::max(out.worst_relative_error, rel);
        ++out.entries;
      }
    }
  }
  return out;
}

}  // namespace oracle
