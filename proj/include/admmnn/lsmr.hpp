#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "admmnn/linalg.hpp"

namespace admmnn {

struct LsmrParams {
  /// Relative tolerance on the normal-equation residual ||A^T r||.
  double atol = 1e-8;
  /// Relative tolerance on the residual ||r||.
  double btol = 1e-8;
  /// Iteration cap; nullopt means min(m, n).
  std::optional<std::size_t> max_iters;
  /// Record ||A x_k - b|| after every iteration (costs one extra product).
  bool record_residuals = false;

  void validate() const;
  std::size_t resolved_max_iters(std::size_t m, std::size_t n) const;
};

enum class LsmrStop {
  converged_residual,
  converged_normal_residual,
  iteration_cap,
};

std::string_view to_string(LsmrStop stop);

struct LsmrReport {
  std::size_t iterations = 0;
  LsmrStop stop_reason = LsmrStop::iteration_cap;
  /// Recurrence estimate of ||A x - b|| at exit.
  double final_residual_norm = 0.0;
  /// Exact residual norms, x_0 = 0 first; filled when record_residuals is set.
  std::vector<double> residual_history;
};

struct LsmrResult {
  Vector x;
  LsmrReport report;
};

/// Minimizes ||A x - b||_2 by LSMR (Golub-Kahan bidiagonalization with a
/// QR recurrence on the normal equations). No damping, no condition-number
/// stopping test.
LsmrResult lsmr_solve(const DenseMatrix& a, std::span<const double> b,
                      const LsmrParams& params = {});

/// Independent lsmr_solve calls sharing the same matrix.
std::vector<LsmrResult> lsmr_solve_multi(const DenseMatrix& a, std::span<const Vector> rhs,
                                         const LsmrParams& params = {});

}  // namespace admmnn
