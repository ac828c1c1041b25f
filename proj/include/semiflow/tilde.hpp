#pragma once

// Observables on the unit-height box Ytilde = Y x [0,1] (closed u-grid)
// and the twisted operator R^(s), which acts slice-by-slice in u through
// the twisted base operator.

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "semiflow/base_transfer.hpp"
#include "semiflow/suspension.hpp"

namespace semiflow {

struct TildeObservable {
  std::shared_ptr<const ChebGrid> base;
  double h_u = 1.0 / 128.0;
  int rows = 0;                                   // closed grid: 0..rows, u = i*h
  std::vector<std::vector<std::vector<cplx>>> vals;  // [br][node][iu]
  Closure closure;  // optional analytic form
  bool smooth = true;

  static TildeObservable zeros(std::shared_ptr<const ChebGrid> base, double h_u) {
    TildeObservable v;
    v.base = std::move(base);
    v.h_u = h_u;
    v.rows = static_cast<int>(std::llround(1.0 / h_u));
    if (std::abs(v.rows * h_u - 1.0) > 1e-12)
      throw std::invalid_argument("TildeObservable: 1/h_u must be an integer");
    const int J = static_cast<int>(v.base->nodes.size());
    const int N = v.base->nodes_per_branch;
    v.vals.assign(J, std::vector<std::vector<cplx>>(N, std::vector<cplx>(v.rows + 1, cplx{})));
    return v;
  }

  static TildeObservable from_function(std::shared_ptr<const ChebGrid> base, double h_u,
                                       const Closure& f) {
    TildeObservable v = zeros(std::move(base), h_u);
    for (std::size_t j = 0; j < v.vals.size(); ++j)
      for (std::size_t k = 0; k < v.vals[j].size(); ++k)
        for (int i = 0; i <= v.rows; ++i)
          v.vals[j][k][i] = f(v.base->nodes[j][k], i * h_u);
    v.closure = f;
    return v;
  }

  int interp_order() const { return smooth ? 6 : 2; }

  cplx eval_grid(const MarkovModel& m, double y, double u) const {
    const int j = m.branch_of(y);
    const int N = base->nodes_per_branch;
    const double xi = base->ref_coord(m, j, y);
    for (int k = 0; k < N; ++k)
      if (std::abs(xi - base->ref_nodes[k]) < 1e-14)
        return uniform_interp(vals[j][k], h_u, u, interp_order());
    std::vector<cplx> slice(N);
    for (int k = 0; k < N; ++k) slice[k] = uniform_interp(vals[j][k], h_u, u, interp_order());
    return barycentric_eval(base->ref_nodes, base->bary_w, slice, xi);
  }

  cplx eval(const MarkovModel& m, double y, double u) const {
    if (closure) return closure(y, u);
    return eval_grid(m, y, u);
  }

  TildeObservable& operator+=(const TildeObservable& o) {
    for (std::size_t j = 0; j < vals.size(); ++j)
      for (std::size_t k = 0; k < vals[j].size(); ++k)
        for (std::size_t i = 0; i < vals[j][k].size(); ++i) vals[j][k][i] += o.vals[j][k][i];
    if (closure && o.closure) {
      Closure a = closure, b = o.closure;
      closure = [a, b](double y, double u) { return a(y, u) + b(y, u); };
    } else {
      closure = nullptr;
    }
    return *this;
  }
  TildeObservable& operator*=(cplx c) {
    for (auto& br : vals)
      for (auto& nd : br)
        for (auto& x : nd) x *= c;
    if (closure) {
      Closure a = closure;
      closure = [a, c](double y, double u) { return c * a(y, u); };
    }
    return *this;
  }
};

// F_eta(Ytilde) discrete norm: sup plus the same-u Holder seminorm.
inline HolderNormReport norm_tilde(const TildeObservable& v, double eta) {
  HolderNormReport rep;
  rep.eta = eta;
  const int N = v.base->nodes_per_branch;
  for (std::size_t j = 0; j < v.vals.size(); ++j) {
    for (int k = 0; k < N; ++k) {
      for (int i = 0; i <= v.rows; ++i)
        rep.sup_norm = std::max(rep.sup_norm, std::abs(v.vals[j][k][i]));
      for (int k2 = k + 1; k2 < N; ++k2) {
        const double d = std::abs(v.base->nodes[j][k] - v.base->nodes[j][k2]);
        if (d < 1e-15) continue;
        const double dpow = std::pow(d, eta);
        for (int i = 0; i <= v.rows; ++i) {
          rep.holder_seminorm = std::max(
              rep.holder_seminorm, std::abs(v.vals[j][k][i] - v.vals[j][k2][i]) / dpow);
          ++rep.pair_count;
        }
      }
    }
  }
  return rep;
}

// \int_{Ytilde} v dmu~  (mu x Lebesgue on [0,1])
inline cplx tilde_integral(const MarkovModel& m, const TildeObservable& v) {
  cplx total{};
  for (std::size_t j = 0; j < v.vals.size(); ++j)
    for (std::size_t k = 0; k < v.vals[j].size(); ++k) {
      const cplx fiber = integrate_uniform(v.vals[j][k], v.h_u);
      total += v.base->leb_w[j][k] * m.density(v.base->nodes[j][k]) * fiber;
    }
  return total;
}

inline TildeObservable zeros_like(const TildeObservable& v) {
  TildeObservable out = v;
  for (auto& br : out.vals)
    for (auto& nd : br)
      for (auto& x : nd) x = cplx{};
  out.closure = nullptr;
  return out;
}

// R^(s) slice-by-slice: each u-slice is an ObservableY hit by the twisted
// base operator, so the slice identity with apply_twisted_R0 is structural.
inline TildeObservable apply_R_hat(const MarkovModel& m, const RoofFunction& roof, cplx s,
                                   const TildeObservable& v) {
  TildeObservable out = zeros_like(v);
  const OperatorMatrix op = assemble_twisted_matrix(m, roof, s, *v.base);
  const int J = static_cast<int>(v.vals.size());
  const int N = v.base->nodes_per_branch;
  Eigen::VectorXcd slice(J * N);
  for (int i = 0; i <= v.rows; ++i) {
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < N; ++k) slice[j * N + k] = v.vals[j][k][i];
    const Eigen::VectorXcd res = op.mat * slice;
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < N; ++k) out.vals[j][k][i] = res[j * N + k];
  }
  return out;
}

// Embed a tilde observable into the suspension (zero above u = 1).
inline SuspensionObservable embed_tilde(const MarkovModel& m,
                                        std::shared_ptr<const SuspGrid> g,
                                        const TildeObservable& v) {
  SuspensionObservable out = SuspensionObservable::zeros(std::move(g), 0);
  out.smooth = v.smooth;
  const int J = static_cast<int>(out.levels[0].size());
  const int N = out.g->base->nodes_per_branch;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) {
      auto& fib = out.levels[0][j][k];
      const auto& src = v.vals[j][k];
      const std::size_t nn = std::min(fib.size(), src.size());
      for (std::size_t i = 0; i < nn; ++i) fib[i] = src[i];
    }
  if (v.closure) {
    Closure f = v.closure;
    out.closures = {[f](double y, double u) { return u <= 1.0 ? f(y, u) : cplx{}; }};
  }
  (void)m;
  return out;
}

// Restrict a suspension observable to the unit box (u in [0,1]).
inline TildeObservable restrict_tilde(const SuspensionObservable& v) {
  TildeObservable out = TildeObservable::zeros(v.g->base, v.g->h_u);
  out.smooth = v.smooth;
  const int J = static_cast<int>(v.levels[0].size());
  const int N = v.g->base->nodes_per_branch;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) {
      const auto& src = v.levels[0][j][k];
      auto& dst = out.vals[j][k];
      for (int i = 0; i <= out.rows && i < static_cast<int>(src.size()); ++i) dst[i] = src[i];
    }
  return out;
}

}  // namespace semiflow
