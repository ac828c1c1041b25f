#pragma once

// The semiflow transfer operator L_t by two independent routes:
//   apply_Lt_exact  — pointwise sum over k-fold inverse branches,
//                     (L_t v)(y,u) = sum_k sum_{F^k y'=y} g_k(y')
//                                    1{0 <= u-t+phi_k(y') < phi(y')}
//                                    v(y', u-t+phi_k(y'))
//   apply_Lt_step   — composition of single-lap steps of size <= 1,
//                     exact in structure since phi >= 2 > step
// plus time correlations by operator quadrature and by Monte Carlo.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "semiflow/suspension.hpp"

namespace semiflow {

struct PreimageWord {
  double x;        // psi_w(y)
  double weight;   // g_k at x
  double phi_sum;  // phi_k(x); 0 for the empty word
  double phi_x;    // roof at x
  int depth;
};

// Enumerate inverse-branch words contributing to L_t at base point y.
// A word can contribute for some u in [0, phi(y)) iff its parent total
// phi_sum stays below t, so the tree is pruned at phi_sum >= t.
inline std::vector<PreimageWord> enumerate_preimages(const MarkovModel& m,
                                                     const RoofFunction& roof, double y,
                                                     double t,
                                                     std::size_t word_cap = 4000000) {
  std::vector<PreimageWord> words;
  words.push_back({y, 1.0, 0.0, roof.phi(y), 0});
  std::size_t frontier_begin = 0, frontier_end = 1;
  const int kmax = static_cast<int>(std::floor(t / 2.0)) + 1;
  for (int depth = 1; depth <= kmax; ++depth) {
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      const PreimageWord w = words[i];
      if (w.phi_sum >= t) continue;
      for (int j = 0; j < m.branch_count(); ++j) {
        const double x = m.branches[j].inverse(w.x);
        const double phi_x = roof.phi(x);
        words.push_back({x, w.weight * m.branches[j].weight(w.x), w.phi_sum + phi_x,
                         phi_x, depth});
        if (words.size() > word_cap)
          throw std::runtime_error("enumerate_preimages: word cap exceeded");
      }
    }
    frontier_begin = frontier_end;
    frontier_end = words.size();
    if (frontier_begin == frontier_end) break;
  }
  return words;
}

// Pointwise (L_t f)(y, u) for a closure f restricted by `window` (both
// optional); the workhorse behind the windowed operators and identity
// checks.  `words` must come from enumerate_preimages(m, roof, y, t).
inline cplx apply_Lt_pointwise(const std::vector<PreimageWord>& words, double t, double u,
                               const std::function<cplx(double, double)>& f) {
  cplx acc{};
  for (const auto& w : words) {
    const double h = u - t + w.phi_sum;
    if (h >= 0.0 && h < w.phi_x) acc += w.weight * f(w.x, h);
  }
  return acc;
}

inline SuspensionObservable apply_Lt_exact(const MarkovModel& m, const SuspensionObservable& v,
                                           double t, double t_max_exact = 12.0) {
  if (t < 0.0) throw std::invalid_argument("apply_Lt_exact: t >= 0");
  if (t > t_max_exact)
    throw std::invalid_argument("apply_Lt_exact: t exceeds t_max_exact; use apply_Lt_step");
  if (t == 0.0) return v;
  SuspensionObservable out = SuspensionObservable::zeros(v.g, 0);
  out.delta = v.delta;
  out.smooth = v.smooth;
  const int J = static_cast<int>(v.levels[0].size());
  const int N = v.g->base->nodes_per_branch;
  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < N; ++k) {
      const auto words = enumerate_preimages(m, v.g->roof, v.g->base->nodes[j][k], t);
      auto& fib = out.levels[0][j][k];
      for (std::size_t i = 0; i < fib.size(); ++i) {
        const double u = i * v.g->h_u;
        cplx acc{};
        for (const auto& w : words) {
          const double h = u - t + w.phi_sum;
          if (h >= 0.0 && h < w.phi_x) acc += w.weight * v.eval(m, w.x, h);
        }
        fib[i] = acc;
      }
    }
  }
  return out;
}

// One transfer step of size s0 <= 1 (exact two-term form):
//   (L_{s0} v)(y,u) = 1_{u >= s0} v(y, u - s0)
//                   + 1_{u < s0} sum_j g(psi_j y) v(psi_j y, u - s0 + phi(psi_j y))
inline SuspensionObservable single_step(const MarkovModel& m, const SuspensionObservable& v,
                                        double s0) {
  SuspensionObservable out = SuspensionObservable::zeros(v.g, 0);
  out.delta = v.delta;
  out.smooth = v.smooth;
  const int J = static_cast<int>(v.levels[0].size());
  const int N = v.g->base->nodes_per_branch;
  const double h = v.g->h_u;
  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < N; ++k) {
      const double y = v.g->base->nodes[j][k];
      auto& fib = out.levels[0][j][k];
      for (std::size_t i = 0; i < fib.size(); ++i) {
        const double u = i * h;
        if (u >= s0) {
          fib[i] = v.fiber_eval(0, j, k, u - s0);
        } else {
          cplx acc{};
          for (int jj = 0; jj < J; ++jj) {
            const double x = m.branches[jj].inverse(y);
            acc += m.branches[jj].weight(y) *
                   v.eval_grid(m, x, u - s0 + v.g->roof.phi(x));
          }
          fib[i] = acc;
        }
      }
    }
  }
  return out;
}

inline SuspensionObservable apply_Lt_step(const MarkovModel& m, const SuspensionObservable& v,
                                          double t, double step = 1.0) {
  if (t < 0.0) throw std::invalid_argument("apply_Lt_step: t >= 0");
  if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("apply_Lt_step: step in (0,1]");
  if (t == 0.0) return v;
  const int n = std::max(1, static_cast<int>(std::ceil(t / step - 1e-12)));
  const double s0 = t / n;
  SuspensionObservable state = v;
  state.closures.clear();          // steps operate on grid data
  state.levels.resize(1);
  for (int i = 0; i < n; ++i) state = single_step(m, state, s0);
  return state;
}

// ---------------------------------------------------------------------------
// Correlations rho_{v,w}(t) = \int v . w o F_t dmu^phi
// ---------------------------------------------------------------------------

inline cplx product_integral(const MarkovModel& m, const SuspensionObservable& a,
                             const SuspensionObservable& b) {
  // \int a(y,u) b(y,u) dmu^phi via the fiber quadrature
  cplx total{};
  const int J = static_cast<int>(a.levels[0].size());
  const int N = a.g->base->nodes_per_branch;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) {
      const auto& fa = a.levels[0][j][k];
      const auto& fb = b.levels[0][j][k];
      std::vector<cplx> prod(fa.size());
      for (std::size_t i = 0; i < fa.size(); ++i) prod[i] = fa[i] * fb[i];
      const double phi = a.g->roof_node[j][k];
      const double tail = phi - (static_cast<int>(prod.size()) - 1) * a.g->h_u;
      total += a.g->base->leb_w[j][k] * m.density(a.g->base->nodes[j][k]) *
               integrate_uniform(prod, a.g->h_u, std::max(0.0, tail));
    }
  return total / a.g->phi_bar;
}

struct CorrelationResult {
  cplx value{};
  double std_error = 0.0;
  long samples = 0;
  long extreme_laps = 0;  // occurrences of N_t == floor(t/2)+1
};

// method "quadrature-via-Lt": \int (L_t v) w dmu^phi
inline CorrelationResult correlation_quadrature(const MarkovModel& m,
                                                const SuspensionObservable& v,
                                                const SuspensionObservable& w, double t) {
  CorrelationResult r;
  const SuspensionObservable lt = apply_Lt_step(m, v, t);
  r.value = product_integral(m, lt, w);
  return r;
}

// method "monte-carlo": (1/n) sum v(p) w(F_t p), with standard error
inline CorrelationResult correlation_monte_carlo(const MarkovModel& m,
                                                 const SuspensionObservable& v,
                                                 const SuspensionObservable& w, double t,
                                                 std::uint64_t seed, long n) {
  CorrelationResult r;
  r.samples = n;
  const auto sample = sample_mu_phi(m, v.g->roof, seed, n);
  const long kmax = static_cast<long>(std::floor(t / 2.0)) + 1;
  cplx sum{};
  double sre = 0, sim = 0, sre2 = 0, sim2 = 0;
  for (const auto& p : sample.points) {
    const auto fl = flow_point(m, v.g->roof, p, t);
    if (fl.lap == kmax) ++r.extreme_laps;
    const cplx val = v.eval(m, p.y, p.u) * w.eval(m, fl.point.y, fl.point.u);
    sum += val;
    sre += val.real();
    sim += val.imag();
    sre2 += val.real() * val.real();
    sim2 += val.imag() * val.imag();
  }
  r.value = sum / double(n);
  const double var_re = std::max(0.0, sre2 / n - (sre / n) * (sre / n));
  const double var_im = std::max(0.0, sim2 / n - (sim / n) * (sim / n));
  r.std_error = std::sqrt((var_re + var_im) / n);
  return r;
}

}  // namespace semiflow
