#pragma once

// The operator renewal machinery on Ytilde:
//   U^(s) = U1^(s) + U2^(s), the resolvent (I - R^(s))^{-1} solved
//   slice-by-slice through the dense base matrix, and T^ = U^(I-R^)^{-1},
// together with the time-domain Laplace quadrature of T_t used as the
// independent oracle for the renewal equation.
//
// All exponential-kernel fiber integrals use per-cell moments of
// e^{z xi} xi^k against a 6-point Lagrange stencil, so the kernel is
// integrated exactly against the local interpolant.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "semiflow/semiflow_transfer.hpp"
#include "semiflow/tilde.hpp"

namespace semiflow {

// ---------------------------------------------------------------------------
// Exponential moments and panel weights
// ---------------------------------------------------------------------------

// mom_k(z) = \int_0^1 e^{z xi} xi^k dxi, k = 0..kmax
inline void exp_moments(cplx z, int kmax, cplx* out) {
  if (std::abs(z) <= 8.0) {
    for (int k = 0; k <= kmax; ++k) {
      cplx term(1.0 / (k + 1.0), 0.0);
      cplx acc = term;
      for (int m = 1; m < 60; ++m) {
        term *= z / double(m);
        const cplx add = term * (double(m + 1) / double(m + k + 1)) /
                         double(m + 1);  // z^m / (m! (k+m+1))
        acc += term / double(k + m + 1) * 0.0 + add * 0.0 +
               term / double(k + m + 1);  // keep the straightforward form
        if (std::abs(term) < 1e-18 * (1.0 + std::abs(acc))) break;
      }
      out[k] = acc;
    }
  } else {
    out[0] = (std::exp(z) - 1.0) / z;
    const cplx ez = std::exp(z);
    for (int k = 1; k <= kmax; ++k) out[k] = (ez - double(k) * out[k - 1]) / z;
  }
}

// coefficients (in xi) of the Lagrange basis on nodes {pos[0..5]}
inline std::array<std::array<double, 6>, 6> lagrange_coeffs(const std::array<double, 6>& pos) {
  std::array<std::array<double, 6>, 6> C{};
  for (int p = 0; p < 6; ++p) {
    std::array<double, 6> poly{};
    poly[0] = 1.0;
    int deg = 0;
    double den = 1.0;
    for (int m = 0; m < 6; ++m) {
      if (m == p) continue;
      // multiply by (xi - pos[m])
      for (int d = deg; d >= 0; --d) {
        poly[d + 1] += poly[d];
        poly[d] *= -pos[m];
      }
      ++deg;
      den *= pos[p] - pos[m];
    }
    for (int d = 0; d < 6; ++d) C[p][d] = poly[d] / den;
  }
  return C;
}

// Panel weights W[p] with \int_0^1 e^{z xi} f(xi) dxi ~ sum_p W[p] f(stencil p),
// stencil nodes at xi = (p - off) for off in 0..5 (off=2 is the interior
// pattern; edge panels shift the stencil).
class ExpPanelWeights {
 public:
  ExpPanelWeights(cplx z, int kmax = 5) {
    cplx mom[6];
    exp_moments(z, 5, mom);
    for (int off = 0; off < 6; ++off) {
      std::array<double, 6> pos{};
      for (int p = 0; p < 6; ++p) pos[p] = double(p - off);
      const auto C = lagrange_coeffs(pos);
      for (int p = 0; p < 6; ++p) {
        cplx acc{};
        for (int d = 0; d < 6; ++d) acc += C[p][d] * mom[d];
        w_[off][p] = acc;
      }
    }
    (void)kmax;
  }

  // weights for the panel [i, i+1] of an n-point fiber
  const std::array<cplx, 6>& row(int i, int n, int* i0) const {
    int start = i - 2;
    start = std::max(0, std::min(start, n - 6));
    *i0 = start;
    return w_[i - start];
  }

 private:
  std::array<std::array<cplx, 6>, 6> w_{};
};

// ---------------------------------------------------------------------------
// Cumulative exponential convolutions on one fiber
// ---------------------------------------------------------------------------

// I_i = \int_0^{u_i} e^{-s (u_i - sigma)} f(sigma) dsigma  (forward)
inline std::vector<cplx> exp_conv_forward(const std::vector<cplx>& f, double h, cplx s,
                                          const ExpPanelWeights& pw) {
  const int n = static_cast<int>(f.size());
  std::vector<cplx> out(n, cplx{});
  if (n < 2) return out;
  const cplx decay = std::exp(-s * h);
  for (int i = 0; i + 1 < n; ++i) {
    int i0 = 0;
    const auto& w = pw.row(i, n, &i0);
    cplx panel{};
    for (int p = 0; p < 6 && i0 + p < n; ++p) panel += w[p] * f[i0 + p];
    out[i + 1] = decay * out[i] + decay * h * panel;
  }
  return out;
}

// W_i = \int_{u_i}^{u_{n-1}} e^{s (sigma - u_i)} f(sigma) dsigma  (backward)
inline std::vector<cplx> exp_conv_backward(const std::vector<cplx>& f, double h, cplx s,
                                           const ExpPanelWeights& pw) {
  const int n = static_cast<int>(f.size());
  std::vector<cplx> out(n, cplx{});
  if (n < 2) return out;
  const cplx grow = std::exp(s * h);
  for (int i = n - 2; i >= 0; --i) {
    int i0 = 0;
    const auto& w = pw.row(i, n, &i0);
    cplx panel{};
    for (int p = 0; p < 6 && i0 + p < n; ++p) panel += w[p] * f[i0 + p];
    out[i] = grow * out[i + 1] + h * panel;
  }
  return out;
}

// Q = \int_0^{phi} e^{s sigma} f(sigma) dsigma over the full fiber,
// including the partial top cell of length tail in (0, h].
inline cplx exp_weighted_fiber_integral(const std::vector<cplx>& f, double h, double tail,
                                        cplx s, const ExpPanelWeights& pw) {
  const int n = static_cast<int>(f.size());
  if (n < 2) return cplx{};
  cplx acc{};
  for (int i = 0; i + 1 < n; ++i) {
    int i0 = 0;
    const auto& w = pw.row(i, n, &i0);
    cplx panel{};
    for (int p = 0; p < 6 && i0 + p < n; ++p) panel += w[p] * f[i0 + p];
    acc += std::exp(s * (i * h)) * h * panel;
  }
  if (tail > 1e-15) {
    // top cell [u_{n-1}, u_{n-1}+tail] with the last 6-point stencil
    const int i0 = std::max(0, n - 6);
    std::array<double, 6> pos{};
    for (int p = 0; p < 6; ++p) pos[p] = (double(i0 + p) - double(n - 1)) * h / tail;
    const auto C = lagrange_coeffs(pos);
    cplx mom[6];
    exp_moments(s * tail, 5, mom);
    cplx panel{};
    for (int p = 0; p < 6 && i0 + p < n; ++p) {
      cplx wp{};
      for (int d = 0; d < 6; ++d) wp += C[p][d] * mom[d];
      panel += wp * f[i0 + p];
    }
    acc += std::exp(s * ((n - 1) * h)) * tail * panel;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Strip policy
// ---------------------------------------------------------------------------

// Laplace-transformed operators are defined for a > 0 and extend to the
// strip a >= -eps; only the left boundary is restricted.
inline void require_strip(cplx s, double eps, const char* who) {
  if (s.real() < -eps - 1e-15)
    throw std::invalid_argument(std::string(who) + ": Re(s) below the admissible strip -eps");
}

// ---------------------------------------------------------------------------
// U^(s) = U1^(s) + U2^(s)
// ---------------------------------------------------------------------------

// (U1^(s) v)(y,u) = \int_0^u e^{-s t} v(y, u-t) dt
inline TildeObservable apply_U1_hat(const MarkovModel& m, const RoofFunction& roof, cplx s,
                                    const TildeObservable& v, double eps) {
  require_strip(s, eps, "apply_U1_hat");
  (void)m;
  (void)roof;
  TildeObservable out = zeros_like(v);
  const ExpPanelWeights pw(s * v.h_u);
  for (std::size_t j = 0; j < v.vals.size(); ++j)
    for (std::size_t k = 0; k < v.vals[j].size(); ++k)
      out.vals[j][k] = exp_conv_forward(v.vals[j][k], v.h_u, s, pw);
  return out;
}

// V^(s)(z,u) = \int_u^1 e^{s(t-u-phi(z))} v(z,t) dt;  U2^(s)v = R~(V^)
inline TildeObservable apply_U2_hat(const MarkovModel& m, const RoofFunction& roof, cplx s,
                                    const TildeObservable& v, double eps) {
  require_strip(s, eps, "apply_U2_hat");
  const ExpPanelWeights pw(s * v.h_u);
  TildeObservable W = zeros_like(v);  // backward integrals, no e^{-s phi} yet
  for (std::size_t j = 0; j < v.vals.size(); ++j)
    for (std::size_t k = 0; k < v.vals[j].size(); ++k)
      W.vals[j][k] = exp_conv_backward(v.vals[j][k], v.h_u, s, pw);
  // out(y,u) = sum_j g(psi_j y) e^{-s phi(psi_j y)} W(psi_j y, u): the
  // twisted base operator applied slice-by-slice
  return apply_R_hat(m, roof, s, W);
}

inline TildeObservable apply_U_hat(const MarkovModel& m, const RoofFunction& roof, cplx s,
                                   const TildeObservable& v, double eps) {
  TildeObservable out = apply_U1_hat(m, roof, s, v, eps);
  out += apply_U2_hat(m, roof, s, v, eps);
  return out;
}

// ---------------------------------------------------------------------------
// Resolvent and T^
// ---------------------------------------------------------------------------

struct ResolventResult {
  TildeObservable value;
  double residual = 0.0;  // max over slices of ||(I-R)x - v||_inf
};

inline ResolventResult resolvent_apply(const MarkovModel& m, const RoofFunction& roof, cplx s,
                                       const TildeObservable& v, double eps,
                                       double s_min = 1e-3, double residual_tol = 1e-8) {
  require_strip(s, eps, "resolvent_apply");
  const int J = static_cast<int>(v.vals.size());
  const int N = v.base->nodes_per_branch;
  if (std::abs(s) < s_min) {
    // near the pole: every u-slice must be mean-zero on Y
    for (int i = 0; i <= v.rows; ++i) {
      cplx mean{};
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < N; ++k)
          mean += v.base->leb_w[j][k] * m.density(v.base->nodes[j][k]) * v.vals[j][k][i];
      if (std::abs(mean) > 1e-10)
        throw std::invalid_argument(
            "resolvent_apply: |s| below s_min requires slice-mean-zero input");
    }
  }
  const OperatorMatrix op = assemble_twisted_matrix(m, roof, s, *v.base);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(J * N, J * N) - op.mat;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  ResolventResult out;
  out.value = zeros_like(v);
  Eigen::VectorXcd rhs(J * N);
  for (int i = 0; i <= v.rows; ++i) {
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < N; ++k) rhs[j * N + k] = v.vals[j][k][i];
    const Eigen::VectorXcd x = lu.solve(rhs);
    const double res = (A * x - rhs).cwiseAbs().maxCoeff();
    out.residual = std::max(out.residual, res);
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < N; ++k) out.value.vals[j][k][i] = x[j * N + k];
  }
  if (out.residual > residual_tol)
    throw std::runtime_error("resolvent_apply: linear solve residual above tolerance");
  return out;
}

// T^(s) = U^(s) (I - R^(s))^{-1}
inline TildeObservable apply_T_hat(const MarkovModel& m, const RoofFunction& roof, cplx s,
                                   const TildeObservable& v, double eps) {
  const ResolventResult r = resolvent_apply(m, roof, s, v, eps);
  return apply_U_hat(m, roof, s, r.value, eps);
}

// ---------------------------------------------------------------------------
// Time-domain oracle: \int_0^T e^{-s t} T_t v dt by stepping L_t
// ---------------------------------------------------------------------------

struct TimeLaplaceResult {
  TildeObservable value;
  double tail_bound = 0.0;
};

// Composite-Simpson Laplace quadrature of T_t v = 1_Y~ L_t (1_Y~ v); the
// state is advanced by grid-aligned steps so the translation part of each
// step is exact.
inline TimeLaplaceResult laplace_T_time(const MarkovModel& m,
                                        std::shared_ptr<const SuspGrid> g, cplx s,
                                        const TildeObservable& v, double T_max,
                                        double dt = 0.0) {
  if (s.real() <= 0.0)
    throw std::invalid_argument("laplace_T_time: Re(s) > 0 required for the oracle");
  if (dt <= 0.0) dt = 4.0 * g->h_u;
  // round to a grid multiple
  const int cells = std::max(1, (int)std::llround(dt / g->h_u));
  dt = cells * g->h_u;
  int steps = (int)std::ceil(T_max / dt);
  if (steps % 2 == 1) ++steps;
  SuspensionObservable state = embed_tilde(m, g, v);
  state.closures.clear();
  TimeLaplaceResult out;
  out.value = zeros_like(v);
  const int J = static_cast<int>(v.vals.size());
  const int N = v.base->nodes_per_branch;
  double sup_state = 0.0;
  auto accumulate = [&](double t, double weight) {
    const cplx w = weight * std::exp(-s * t);
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < N; ++k) {
        const auto& fib = state.levels[0][j][k];
        auto& dst = out.value.vals[j][k];
        for (int i = 0; i <= v.rows; ++i) dst[i] += w * fib[i];
      }
  };
  const double h3 = dt / 3.0;
  accumulate(0.0, h3);
  for (int i = 1; i <= steps; ++i) {
    state = single_step(m, state, dt);
    const double w = (i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    accumulate(i * dt, w * h3);
  }
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k)
      for (int i = 0; i <= v.rows; ++i)
        sup_state = std::max(sup_state, std::abs(state.levels[0][j][k][i]));
  out.tail_bound = sup_state * std::exp(-s.real() * steps * dt) / s.real();
  return out;
}

}  // namespace semiflow
