#pragma once

// The suspension Y^phi: fiber grids over the collocation nodes, the
// semiflow with lap numbers, observables with optional u-derivative
// stacks and analytic closures, weighted norms, the invariant-measure
// integral, and constructors for good-support test observables.
//
// Grid conventions: each base node carries a uniform fiber grid
// u_i = i*h_u covering [0, phi(y)); base interpolation works in the
// normalized height w = u/phi(y), which keeps every stencil inside the
// fibers even near the roof.

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "semiflow/markov_model.hpp"
#include "semiflow/observable_y.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/roof.hpp"

namespace semiflow {

// ---------------------------------------------------------------------------
// Suspension grid
// ---------------------------------------------------------------------------

struct SuspGrid {
  std::shared_ptr<const ChebGrid> base;
  RoofFunction roof;
  double h_u = 1.0 / 128.0;
  std::vector<std::vector<double>> roof_node;  // phi at each base node
  std::vector<std::vector<int>> fiber_n;       // grid points per fiber
  double phi_bar = 0.0;
  double inf_phi = 0.0;
  double sup_phi = 0.0;

  static std::shared_ptr<const SuspGrid> build(const MarkovModel& m,
                                               std::shared_ptr<const ChebGrid> grid,
                                               const RoofFunction& roof, double h_u) {
    auto g = std::make_shared<SuspGrid>();
    g->base = std::move(grid);
    g->roof = roof;
    g->h_u = h_u;
    const int J = m.branch_count();
    const int N = g->base->nodes_per_branch;
    g->roof_node.resize(J);
    g->fiber_n.resize(J);
    double inf_phi = INFINITY, sup_phi = -INFINITY, mean = 0.0;
    for (int j = 0; j < J; ++j) {
      g->roof_node[j].resize(N);
      g->fiber_n[j].resize(N);
      for (int k = 0; k < N; ++k) {
        const double y = g->base->nodes[j][k];
        const double p = roof.phi(y);
        if (p < 2.0 - 1e-12) throw std::invalid_argument("SuspGrid: roof below 2");
        g->roof_node[j][k] = p;
        g->fiber_n[j][k] = static_cast<int>(std::ceil(p / h_u - 1e-12));
        mean += g->base->leb_w[j][k] * m.density(y) * p;
      }
      // probe the branch interior for inf/sup as well
      const auto& b = m.branches[j];
      for (int i = 0; i <= 256; ++i) {
        const double y = b.lo + (b.hi - b.lo) * i / 256.0;
        const double p = roof.phi(std::min(y, b.hi - 1e-13));
        inf_phi = std::min(inf_phi, p);
        sup_phi = std::max(sup_phi, p);
      }
    }
    g->phi_bar = mean;
    g->inf_phi = inf_phi;
    g->sup_phi = sup_phi;
    return g;
  }
};

// ---------------------------------------------------------------------------
// Points and the semiflow
// ---------------------------------------------------------------------------

struct SuspensionPoint {
  double y = 0.0;
  double u = 0.0;
};

struct FlowResult {
  SuspensionPoint point;
  long lap = 0;
};

inline FlowResult flow_point(const MarkovModel& m, const RoofFunction& roof,
                             SuspensionPoint p, double t) {
  if (t < 0.0) throw std::invalid_argument("flow_point: t >= 0 required");
  double phi0 = roof.phi(p.y);
  if (p.u < 0.0 || p.u >= phi0)
    throw std::invalid_argument("flow_point: point not canonical (0 <= u < phi)");
  double y = p.y, u = p.u + t;
  long lap = 0;
  const long guard = static_cast<long>(t / 2.0) + 4;
  while (true) {
    const double phi = roof.phi(y);
    if (u < phi) break;
    u -= phi;
    y = m.map_forward(y);
    ++lap;
    if (lap > guard) throw std::runtime_error("flow_point: lap guard exceeded");
  }
  return {{y, u}, lap};
}

// ---------------------------------------------------------------------------
// Observables on Y^phi
// ---------------------------------------------------------------------------

using FiberField = std::vector<std::vector<std::vector<cplx>>>;  // [br][node][iu]
using Closure = std::function<cplx(double, double)>;

struct SuspensionObservable {
  std::shared_ptr<const SuspGrid> g;
  double delta = 0.0;   // weight parameter carried with the observable
  double margin = 0.0;  // good-support margin r (0 if undeclared)
  bool smooth = false;  // high-order u-stencils justified
  std::vector<FiberField> levels;  // levels[q] = d^q v / du^q values
  std::vector<Closure> closures;   // optional, aligned with levels

  int stack_order() const { return static_cast<int>(levels.size()) - 1; }
  bool has_closure(int q = 0) const {
    return q < static_cast<int>(closures.size()) && static_cast<bool>(closures[q]);
  }

  static SuspensionObservable zeros(std::shared_ptr<const SuspGrid> g, int stack = 0) {
    SuspensionObservable v;
    v.g = std::move(g);
    const int J = static_cast<int>(v.g->fiber_n.size());
    const int N = v.g->base->nodes_per_branch;
    v.levels.resize(stack + 1);
    for (auto& lvl : v.levels) {
      lvl.resize(J);
      for (int j = 0; j < J; ++j) {
        lvl[j].resize(N);
        for (int k = 0; k < N; ++k) lvl[j][k].assign(v.g->fiber_n[j][k], cplx{});
      }
    }
    return v;
  }

  // materialize closures onto the grid for levels that have them
  void fill_from_closures() {
    const int J = static_cast<int>(g->fiber_n.size());
    const int N = g->base->nodes_per_branch;
    for (int q = 0; q <= stack_order(); ++q) {
      if (!has_closure(q)) continue;
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < N; ++k) {
          const double y = g->base->nodes[j][k];
          auto& fib = levels[q][j][k];
          for (std::size_t i = 0; i < fib.size(); ++i) fib[i] = closures[q](y, i * g->h_u);
        }
    }
  }

  int interp_order() const { return smooth ? 6 : 2; }

  // grid evaluation at (y, u) with 0 <= u < phi(y)
  cplx eval_grid(const MarkovModel& m, double y, double u, int q = 0) const {
    const int j = m.branch_of(y);
    const double phi_y = g->roof.phi(y);
    double w = u / phi_y;
    if (w < 0.0) w = 0.0;
    if (w > 1.0 - 1e-15) w = 1.0 - 1e-15;
    const int N = g->base->nodes_per_branch;
    const double xi = g->base->ref_coord(m, j, y);
    // exact node fast path
    for (int k = 0; k < N; ++k) {
      if (std::abs(xi - g->base->ref_nodes[k]) < 1e-14)
        return fiber_eval(q, j, k, w * g->roof_node[j][k]);
    }
    std::vector<cplx> vals(N);
    for (int k = 0; k < N; ++k) vals[k] = fiber_eval(q, j, k, w * g->roof_node[j][k]);
    return barycentric_eval(g->base->ref_nodes, g->base->bary_w, vals, xi);
  }

  cplx eval(const MarkovModel& m, double y, double u, int q = 0) const {
    if (has_closure(q)) return closures[q](y, u);
    return eval_grid(m, y, u, q);
  }

  // interpolate one fiber at height u (may reach into the top partial cell)
  cplx fiber_eval(int q, int j, int k, double u) const {
    const auto& fib = levels[q][j][k];
    const int n = static_cast<int>(fib.size());
    if (n == 0) return cplx{};
    double s = u / g->h_u;
    if (s < 0.0) s = 0.0;
    // allow mild extrapolation into [u_{n-1}, phi)
    const double s_max = g->roof_node[j][k] / g->h_u;
    if (s > s_max) s = s_max;
    const int npts = std::min(interp_order(), n);
    int i0 = static_cast<int>(std::floor(s)) - (npts - 1) / 2;
    i0 = std::max(0, std::min(i0, n - npts));
    const double xi = s - i0;
    if (std::abs(xi - std::round(xi)) < 1e-12) {
      const int kk = static_cast<int>(std::round(xi));
      if (kk >= 0 && kk < npts) return fib[i0 + kk];
    }
    double row[12];
    lagrange_row(npts, xi, row);
    cplx acc{};
    for (int p = 0; p < npts; ++p) acc += row[p] * fib[i0 + p];
    return acc;
  }

  SuspensionObservable& operator+=(const SuspensionObservable& o) {
    const int q_max = std::min(stack_order(), o.stack_order());
    levels.resize(q_max + 1);
    for (int q = 0; q <= q_max; ++q)
      for (std::size_t j = 0; j < levels[q].size(); ++j)
        for (std::size_t k = 0; k < levels[q][j].size(); ++k)
          for (std::size_t i = 0; i < levels[q][j][k].size(); ++i)
            levels[q][j][k][i] += o.levels[q][j][k][i];
    std::vector<Closure> cl;
    for (int q = 0; q <= q_max; ++q) {
      if (has_closure(q) && o.has_closure(q)) {
        Closure a = closures[q], b = o.closures[q];
        cl.push_back([a, b](double y, double u) { return a(y, u) + b(y, u); });
      } else {
        cl.clear();
        break;
      }
    }
    closures = cl;
    margin = std::min(margin, o.margin);
    smooth = smooth && o.smooth;
    return *this;
  }

  SuspensionObservable& operator*=(cplx c) {
    for (auto& lvl : levels)
      for (auto& br : lvl)
        for (auto& fib : br)
          for (auto& x : fib) x *= c;
    for (auto& f : closures) {
      if (!f) continue;
      Closure base = f;
      f = [base, c](double y, double u) { return c * base(y, u); };
    }
    return *this;
  }
};

// ---------------------------------------------------------------------------
// Norms and integrals
// ---------------------------------------------------------------------------

struct LevelNorm {
  double sup = 0.0;      // |.|_{delta,inf}
  double seminorm = 0.0; // |.|_{delta,eta}
  double total() const { return sup + seminorm; }
};

struct NormReportSuspension {
  std::vector<LevelNorm> per_level;
  double delta = 0.0;
  double eta = 0.0;
  double total = 0.0;  // max over levels of sup + seminorm
};

inline NormReportSuspension suspension_norm(const SuspensionObservable& v, double delta,
                                            double eta, int m) {
  if (m > v.stack_order())
    throw std::invalid_argument("suspension_norm: derivative stack shorter than m");
  NormReportSuspension rep;
  rep.delta = delta;
  rep.eta = eta;
  const int J = static_cast<int>(v.levels[0].size());
  const int N = v.g->base->nodes_per_branch;
  const double h = v.g->h_u;
  for (int q = 0; q <= m; ++q) {
    LevelNorm ln;
    for (int j = 0; j < J; ++j) {
      for (int k = 0; k < N; ++k) {
        const auto& fib = v.levels[q][j][k];
        for (std::size_t i = 0; i < fib.size(); ++i)
          ln.sup = std::max(ln.sup, std::exp(-delta * (i * h)) * std::abs(fib[i]));
        for (int k2 = k + 1; k2 < N; ++k2) {
          const double d = std::abs(v.g->base->nodes[j][k] - v.g->base->nodes[j][k2]);
          if (d < 1e-15) continue;
          const double dpow = std::pow(d, eta);
          const auto& fib2 = v.levels[q][j][k2];
          const std::size_t nn = std::min(fib.size(), fib2.size());
          for (std::size_t i = 0; i < nn; ++i) {
            const double q2 =
                std::exp(-delta * (i * h)) * std::abs(fib[i] - fib2[i]) / dpow;
            ln.seminorm = std::max(ln.seminorm, q2);
          }
        }
      }
    }
    rep.per_level.push_back(ln);
    rep.total = std::max(rep.total, ln.total());
  }
  return rep;
}

// (1/phi_bar) \int_Y \int_0^{phi(y)} v du dmu
inline cplx integral_mu_phi(const MarkovModel& m, const SuspensionObservable& v, int level = 0) {
  cplx total{};
  const int J = static_cast<int>(v.levels[level].size());
  const int N = v.g->base->nodes_per_branch;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) {
      const auto& fib = v.levels[level][j][k];
      const double phi = v.g->roof_node[j][k];
      const double tail = phi - (static_cast<int>(fib.size()) - 1) * v.g->h_u;
      const cplx fiber = integrate_uniform(fib, v.g->h_u, std::max(0.0, tail));
      const double y = v.g->base->nodes[j][k];
      total += v.g->base->leb_w[j][k] * m.density(y) * fiber;
    }
  return total / v.g->phi_bar;
}

// ---------------------------------------------------------------------------
// Flow-direction derivative
// ---------------------------------------------------------------------------

inline SuspensionObservable partial_u(const SuspensionObservable& v) {
  SuspensionObservable out;
  out.g = v.g;
  out.delta = v.delta;
  out.margin = v.margin;
  out.smooth = v.smooth;
  if (v.stack_order() >= 1) {
    out.levels.assign(v.levels.begin() + 1, v.levels.end());
    if (v.closures.size() >= 2)
      out.closures.assign(v.closures.begin() + 1, v.closures.end());
    return out;
  }
  // numeric fallback: centered differences, one-sided at fiber endpoints
  out.levels.resize(1);
  const int J = static_cast<int>(v.levels[0].size());
  const int N = v.g->base->nodes_per_branch;
  const double h = v.g->h_u;
  out.levels[0].resize(J);
  for (int j = 0; j < J; ++j) {
    out.levels[0][j].resize(N);
    for (int k = 0; k < N; ++k) {
      const auto& f = v.levels[0][j][k];
      const int n = static_cast<int>(f.size());
      auto& d = out.levels[0][j][k];
      d.assign(n, cplx{});
      if (n < 3) continue;
      d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
      for (int i = 1; i < n - 1; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
      d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    }
  }
  out.margin = std::max(0.0, v.margin - h);
  return out;
}

// ---------------------------------------------------------------------------
// Good-support test observables
// ---------------------------------------------------------------------------

// polynomial bump (c*x*(1-x))^p on [lo,hi], zero outside, derivatives exact
struct PolyBump {
  double lo = 0.0, hi = 1.0;
  std::vector<double> coeff;  // coefficients in the normalized coordinate

  static PolyBump make(double lo, double hi, int power = 6) {
    PolyBump b;
    b.lo = lo;
    b.hi = hi;
    // (4x(1-x))^p expanded: convolve p copies of 4x - 4x^2
    std::vector<double> poly = {1.0};
    const std::vector<double> factor = {0.0, 4.0, -4.0};
    for (int i = 0; i < power; ++i) {
      std::vector<double> next(poly.size() + 2, 0.0);
      for (std::size_t a = 0; a < poly.size(); ++a)
        for (std::size_t c = 0; c < 3; ++c) next[a + c] += poly[a] * factor[c];
      poly = std::move(next);
    }
    b.coeff = std::move(poly);
    return b;
  }

  double value(double u, int q = 0) const {
    if (u <= lo || u >= hi) return 0.0;
    const double scale = 1.0 / (hi - lo);
    const double x = (u - lo) * scale;
    std::vector<double> c = coeff;
    for (int d = 0; d < q; ++d) {
      for (std::size_t i = 0; i + 1 < c.size(); ++i) c[i] = (i + 1) * c[i + 1];
      c.pop_back();
      if (c.empty()) return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc * std::pow(scale, q);
  }
};

struct TestObservableSpec {
  double margin = 0.15;  // r; bump support is [r, 2-r]
  int stack_order = 4;   // m
  bool mean_zero = true;
  double amplitude = 1.0;
  double omega = 0.0;  // optional fiber phase e^{i omega u}
  std::function<cplx(double)> profile;  // base factor (default: sin/cos mix)
  std::vector<PolyBump> bumps;          // default: single bump on [r, 2-r]
};

namespace detail {
// fiber factor value/derivative: (sum of bumps)(u) * e^{i omega u}
inline cplx fiber_factor(const std::vector<PolyBump>& bumps, double omega, double u, int q) {
  if (omega == 0.0) {
    double acc = 0.0;
    for (const auto& b : bumps) acc += b.value(u, q);
    return {acc, 0.0};
  }
  // Leibniz on b(u) e^{i omega u}
  cplx acc{};
  const cplx iw(0.0, omega);
  for (int i = 0; i <= q; ++i) {
    double bi = 0.0;
    for (const auto& b : bumps) bi += b.value(u, i);
    double binom = 1.0;
    for (int t = 0; t < i; ++t) binom = binom * double(q - t) / double(t + 1);
    cplx pw{1.0, 0.0};
    for (int t = 0; t < q - i; ++t) pw *= iw;
    acc += binom * bi * pw;
  }
  return acc * std::exp(iw * u);
}
}  // namespace detail

// v(y,u) = profile(y) * bump-sum(u) * e^{i omega u}, derivative stack in u
// populated analytically; the optional mean-zero projection subtracts a
// multiple of the unit-mass reference bump so good support is preserved.
inline SuspensionObservable build_test_observable(const MarkovModel& m,
                                                  std::shared_ptr<const SuspGrid> g,
                                                  TestObservableSpec spec) {
  if (spec.margin >= 1.0) throw std::invalid_argument("build_test_observable: margin r < 1");
  if (spec.margin <= 0.0) throw std::invalid_argument("build_test_observable: margin r > 0");
  if (!spec.profile) {
    spec.profile = [](double y) {
      return cplx(std::sin(2.0 * kPi * y) + 0.3 * std::cos(4.0 * kPi * y) + 0.7, 0.0);
    };
  }
  if (spec.bumps.empty())
    spec.bumps.push_back(PolyBump::make(spec.margin, 2.0 - spec.margin));
  for (const auto& b : spec.bumps)
    if (b.lo < spec.margin - 1e-12 || b.hi > 2.0 - spec.margin + 1e-12)
      throw std::invalid_argument("build_test_observable: bump outside declared margin");

  SuspensionObservable v = SuspensionObservable::zeros(g, spec.stack_order);
  v.margin = spec.margin;
  v.smooth = true;
  const double amp = spec.amplitude;
  auto profile = spec.profile;
  auto bumps = spec.bumps;
  const double omega = spec.omega;
  v.closures.resize(spec.stack_order + 1);
  for (int q = 0; q <= spec.stack_order; ++q) {
    v.closures[q] = [amp, profile, bumps, omega, q](double y, double u) {
      return amp * profile(y) * detail::fiber_factor(bumps, omega, u, q);
    };
  }
  v.fill_from_closures();

  if (spec.mean_zero) {
    const cplx mean = integral_mu_phi(m, v);
    if (std::abs(mean) > 0.0) {
      TestObservableSpec ref;
      ref.margin = spec.margin;
      ref.stack_order = spec.stack_order;
      ref.mean_zero = false;
      ref.amplitude = 1.0;
      ref.profile = [](double) { return cplx{1.0, 0.0}; };
      ref.bumps.push_back(PolyBump::make(spec.margin, 2.0 - spec.margin));
      SuspensionObservable w0 = build_test_observable(m, g, ref);
      const cplx w0_mass = integral_mu_phi(m, w0);
      w0 *= -mean / w0_mass;
      v += w0;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Monte Carlo sampling of mu^phi
// ---------------------------------------------------------------------------

struct SampleResult {
  std::vector<SuspensionPoint> points;
  long proposals = 0;
  double acceptance_rate = 0.0;
};

inline SampleResult sample_mu_phi(const MarkovModel& m, const RoofFunction& roof,
                                  std::uint64_t seed, long n) {
  SampleResult out;
  out.points.reserve(n);
  Rng rng(seed);
  const double cover = m.branches.back().hi;
  // sup phi over a probe grid
  double sup = 0.0;
  for (int i = 0; i <= 4096; ++i)
    sup = std::max(sup, roof.phi(std::min(cover * i / 4096.0, cover - 1e-13)));
  while (static_cast<long>(out.points.size()) < n) {
    const double y = rng.uniform(0.0, cover);
    const double u = rng.uniform(0.0, sup);
    ++out.proposals;
    if (u < roof.phi(y)) out.points.push_back({y, u});
  }
  out.acceptance_rate = double(n) / double(out.proposals);
  return out;
}

}  // namespace semiflow
