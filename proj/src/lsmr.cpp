#include "admmnn/lsmr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace admmnn {

namespace {

struct Rotation {
  double c;
  double s;
  double r;
};

// Stable Givens rotation with r = hypot(a, b), c = a / r, s = b / r.
Rotation sym_ortho(double a, double b) {
  if (b == 0.0) return {a == 0.0 ? 1.0 : std::copysign(1.0, a), 0.0, std::abs(a)};
  if (a == 0.0) return {0.0, std::copysign(1.0, b), std::abs(b)};
  if (std::abs(b) > std::abs(a)) {
    const double tau = a / b;
    const double s = std::copysign(1.0, b) / std::sqrt(1.0 + tau * tau);
    return {s * tau, s, b / s};
  }
  const double tau = b / a;
  const double c = std::copysign(1.0, a) / std::sqrt(1.0 + tau * tau);
  return {c, c * tau, a / c};
}

void scale_in_place(Vector& v, double s) {
  for (double& e : v) e *= s;
}

double exact_residual(const DenseMatrix& a, const Vector& x, std::span<const double> b) {
  Vector r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return norm2(r);
}

}  // namespace

void LsmrParams::validate() const {
  if (!(atol >= 0.0) || !(btol >= 0.0)) {
    throw std::invalid_argument("LsmrParams: atol and btol must be non-negative");
  }
  if (max_iters && *max_iters == 0) {
    throw std::invalid_argument("LsmrParams: max_iters must be at least 1");
  }
}

std::size_t LsmrParams::resolved_max_iters(std::size_t m, std::size_t n) const {
  return max_iters ? *max_iters : std::min(m, n);
}

std::string_view to_string(LsmrStop stop) {
  switch (stop) {
    case LsmrStop::converged_residual: return "converged_residual";
    case LsmrStop::converged_normal_residual: return "converged_normal_residual";
    case LsmrStop::iteration_cap: return "iteration_cap";
  }
  return "unknown";
}

LsmrResult lsmr_solve(const DenseMatrix& a, std::span<const double> b, const LsmrParams& params) {
  params.validate();
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m) {
    throw DimensionError("lsmr_solve: matrix " + a.shape_string() +
                         " with right-hand side of length " + std::to_string(b.size()));
  }
  const std::size_t max_iters = params.resolved_max_iters(m, n);

  LsmrResult result{Vector(n, 0.0), {}};
  Vector& x = result.x;
  LsmrReport& report = result.report;

  Vector u(b.begin(), b.end());
  const double normb = norm2(u);
  double beta = normb;
  Vector v(n, 0.0);
  double alpha = 0.0;
  if (beta > 0.0) {
    scale_in_place(u, 1.0 / beta);
    v = matvec_transposed(a, u);
    alpha = norm2(v);
  }
  if (alpha > 0.0) scale_in_place(v, 1.0 / alpha);

  if (params.record_residuals) report.residual_history.push_back(normb);
  report.final_residual_norm = normb;

  if (normb == 0.0) {
    report.stop_reason = LsmrStop::converged_residual;
    return result;
  }
  if (alpha * beta == 0.0) {
    // A^T b = 0: x = 0 already satisfies the normal equations.
    report.stop_reason = LsmrStop::converged_normal_residual;
    return result;
  }

  // Bidiagonalization and QR recurrence state.
  double zetabar = alpha * beta;
  double alphabar = alpha;
  double rho = 1.0;
  double rhobar = 1.0;
  double cbar = 1.0;
  double sbar = 0.0;
  Vector h = v;
  Vector hbar(n, 0.0);

  // Residual norm estimation state.
  double betadd = beta;
  double betad = 0.0;
  double rhodold = 1.0;
  double tautildeold = 0.0;
  double thetatilde = 0.0;
  double zeta = 0.0;
  double d = 0.0;

  double norm_a2 = alpha * alpha;
  double norm_a = std::sqrt(norm_a2);
  double normr = beta;

  std::size_t itn = 0;
  while (itn < max_iters) {
    ++itn;

    // Continue the bidiagonalization: beta u = A v - alpha u, alpha v = A^T u - beta v.
    {
      Vector av = matvec(a, v);
      for (std::size_t i = 0; i < m; ++i) u[i] = av[i] - alpha * u[i];
    }
    beta = norm2(u);
    if (beta > 0.0) {
      scale_in_place(u, 1.0 / beta);
      Vector atu = matvec_transposed(a, u);
      for (std::size_t j = 0; j < n; ++j) v[j] = atu[j] - beta * v[j];
      alpha = norm2(v);
      if (alpha > 0.0) scale_in_place(v, 1.0 / alpha);
    }

    // Without damping the first rotation is the identity.
    const double alphahat = alphabar;
    const double chat = 1.0;
    const double shat = 0.0;

    const double rhoold = rho;
    const Rotation rot = sym_ortho(alphahat, beta);
    rho = rot.r;
    const double thetanew = rot.s * alpha;
    alphabar = rot.c * alpha;

    const double rhobarold = rhobar;
    const double zetaold = zeta;
    const double thetabar = sbar * rho;
    const Rotation rotbar = sym_ortho(cbar * rho, thetanew);
    cbar = rotbar.c;
    sbar = rotbar.s;
    rhobar = rotbar.r;
    zeta = cbar * zetabar;
    zetabar = -sbar * zetabar;

    // Update h, hbar and x.
    const double hbar_coef = thetabar * rho / (rhoold * rhobarold);
    for (std::size_t j = 0; j < n; ++j) hbar[j] = h[j] - hbar_coef * hbar[j];
    const double x_coef = zeta / (rho * rhobar);
    for (std::size_t j = 0; j < n; ++j) x[j] += x_coef * hbar[j];
    const double h_coef = thetanew / rho;
    for (std::size_t j = 0; j < n; ++j) h[j] = v[j] - h_coef * h[j];

    // Estimate ||r||.
    const double betaacute = chat * betadd;
    const double betacheck = -shat * betadd;
    const double betahat = rot.c * betaacute;
    betadd = -rot.s * betaacute;

    const double thetatildeold = thetatilde;
    const Rotation rottilde = sym_ortho(rhodold, thetabar);
    thetatilde = rottilde.s * rhobar;
    rhodold = rottilde.c * rhobar;
    betad = -rottilde.s * betad + rottilde.c * betahat;

    tautildeold = (zetaold - thetatildeold * tautildeold) / rottilde.r;
    const double taud = (zeta - thetatilde * tautildeold) / rhodold;
    d += betacheck * betacheck;
    normr = std::sqrt(d + (betad - taud) * (betad - taud) + betadd * betadd);

    // Frobenius-norm estimate of A from the bidiagonal entries.
    norm_a2 += beta * beta;
    norm_a = std::sqrt(norm_a2);
    norm_a2 += alpha * alpha;

    const double normar = std::abs(zetabar);
    const double normx = norm2(x);

    if (params.record_residuals) report.residual_history.push_back(exact_residual(a, x, b));

    const double test1 = normr / normb;
    const double test2 = (norm_a * normr != 0.0) ? normar / (norm_a * normr)
                                                 : std::numeric_limits<double>::infinity();
    const double t1 = test1 / (1.0 + norm_a * normx / normb);
    const double rtol = params.btol + params.atol * norm_a * normx / normb;

    report.iterations = itn;
    report.final_residual_norm = normr;

    // Later checks take precedence, matching the reference ordering.
    std::optional<LsmrStop> stop;
    if (itn >= max_iters) stop = LsmrStop::iteration_cap;
    if (1.0 + test2 <= 1.0) stop = LsmrStop::converged_normal_residual;
    if (1.0 + t1 <= 1.0) stop = LsmrStop::converged_residual;
    if (test2 <= params.atol) stop = LsmrStop::converged_normal_residual;
    if (test1 <= rtol) stop = LsmrStop::converged_residual;
    if (stop) {
      report.stop_reason = *stop;
      break;
    }
  }
  return result;
}

std::vector<LsmrResult> lsmr_solve_multi(const DenseMatrix& a, std::span<const Vector> rhs,
                                         const LsmrParams& params) {
  std::vector<LsmrResult> out;
  out.reserve(rhs.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    try {
      out.push_back(lsmr_solve(a, rhs[k], params));
    } catch (const DimensionError& e) {
      throw DimensionError("lsmr_solve_multi: right-hand side " + std::to_string(k) + ": " +
                           e.what());
    }
  }
  return out;
}

}  // namespace admmnn
