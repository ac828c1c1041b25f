#pragma once

// Collocation and quadrature primitives shared by the whole library:
// Chebyshev-Gauss-Lobatto nodes with barycentric interpolation,
// Clenshaw-Curtis weights, Gauss-Legendre rules, and high-order
// helpers for uniform fiber grids.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace semiflow {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// Chebyshev-Gauss-Lobatto nodes on [-1,1], increasing order.
// ---------------------------------------------------------------------------

inline std::vector<double> cgl_nodes(int n) {
  if (n < 2) throw std::invalid_argument("cgl_nodes: need at least 2 nodes");
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = -std::cos(kPi * k / (n - 1));
  x.front() = -1.0;
  x.back() = 1.0;
  if (n % 2 == 1) x[n / 2] = 0.0;
  return x;
}

// Barycentric weights for CGL nodes: (-1)^k, halved at the endpoints.
inline std::vector<double> cgl_barycentric_weights(int n) {
  std::vector<double> w(n);
  for (int k = 0; k < n; ++k) w[k] = (k % 2 == 0) ? 1.0 : -1.0;
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

// Second-form barycentric interpolation at xi (reference coordinates).
template <typename T>
T barycentric_eval(const std::vector<double>& x, const std::vector<double>& w,
                   const std::vector<T>& f, double xi) {
  const int n = static_cast<int>(x.size());
  T num{};
  double den = 0.0;
  for (int k = 0; k < n; ++k) {
    const double dx = xi - x[k];
    if (std::abs(dx) < 1e-14) return f[k];
    const double c = w[k] / dx;
    num += c * f[k];
    den += c;
  }
  return num / den;
}

// Row of interpolation weights c_k(xi) with sum 1; exact basis at nodes.
inline std::vector<double> barycentric_weight_row(const std::vector<double>& x,
                                                  const std::vector<double>& w,
                                                  double xi) {
  const int n = static_cast<int>(x.size());
  std::vector<double> row(n, 0.0);
  for (int k = 0; k < n; ++k) {
    if (std::abs(xi - x[k]) < 1e-14) {
      row[k] = 1.0;
      return row;
    }
  }
  double den = 0.0;
  for (int k = 0; k < n; ++k) {
    row[k] = w[k] / (xi - x[k]);
    den += row[k];
  }
  for (int k = 0; k < n; ++k) row[k] /= den;
  return row;
}

// ---------------------------------------------------------------------------
// Clenshaw-Curtis weights on n CGL nodes for \int_{-1}^{1}.
// Trefethen's clencurt with N = n-1 panels.
// ---------------------------------------------------------------------------

inline std::vector<double> clenshaw_curtis_weights(int n) {
  const int N = n - 1;
  if (N < 1) throw std::invalid_argument("clenshaw_curtis_weights: n >= 2");
  std::vector<double> w(n, 0.0);
  if (N == 1) {
    w[0] = w[1] = 1.0;
    return w;
  }
  std::vector<double> theta(n);
  for (int k = 0; k <= N; ++k) theta[k] = kPi * k / N;
  std::vector<double> v(N - 1, 1.0);
  if (N % 2 == 0) {
    w[0] = 1.0 / (N * N - 1.0);
    w[N] = w[0];
    for (int k = 1; k <= N / 2 - 1; ++k)
      for (int i = 1; i < N; ++i)
        v[i - 1] -= 2.0 * std::cos(2.0 * k * theta[i]) / (4.0 * k * k - 1.0);
    for (int i = 1; i < N; ++i)
      v[i - 1] -= std::cos(1.0 * N * theta[i]) / (N * N - 1.0);
  } else {
    w[0] = 1.0 / (N * N);
    w[N] = w[0];
    for (int k = 1; k <= (N - 1) / 2; ++k)
      for (int i = 1; i < N; ++i)
        v[i - 1] -= 2.0 * std::cos(2.0 * k * theta[i]) / (4.0 * k * k - 1.0);
  }
  for (int i = 1; i < N; ++i) w[i] = 2.0 * v[i - 1] / N;
  // nodes here are cos(theta) decreasing; weights are symmetric, so the
  // increasing-node convention uses the same array.
  return w;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration.
// ---------------------------------------------------------------------------

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline QuadRule gauss_legendre(int n) {
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      const double dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
    }
    const double dp = n * (x * p0 - p1) / (x * x - 1.0);
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Newton starting guesses give decreasing nodes; sort increasing.
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return r.x[a] < r.x[b]; });
  QuadRule s;
  s.x.resize(n);
  s.w.resize(n);
  for (int i = 0; i < n; ++i) {
    s.x[i] = r.x[idx[i]];
    s.w[i] = r.w[idx[i]];
  }
  return s;
}

// Composite Gauss-Legendre over [a,b] with >= pts_per_unit points per unit
// length (panels of at most one unit).
template <typename F>
auto composite_gauss(F&& f, double a, double b, int pts_per_unit,
                     const QuadRule& base) -> decltype(f(0.0)) {
  using R = decltype(f(0.0));
  R total{};
  if (b <= a) return total;
  const double len = b - a;
  const int panels = std::max(1, (int)std::ceil(len * pts_per_unit / base.x.size()));
  const double h = len / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t g = 0; g < base.x.size(); ++g) {
      const double t = lo + 0.5 * h * (base.x[g] + 1.0);
      total += (0.5 * h * base.w[g]) * f(t);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Uniform-grid helpers (fiber direction).
// ---------------------------------------------------------------------------

// Lagrange weights for `npts` consecutive grid points starting at index i0,
// evaluated at local coordinate xi (units of h, relative to i0).
inline void lagrange_row(int npts, double xi, double* row) {
  for (int k = 0; k < npts; ++k) {
    double num = 1.0, den = 1.0;
    for (int m = 0; m < npts; ++m) {
      if (m == k) continue;
      num *= (xi - m);
      den *= double(k - m);
    }
    row[k] = num / den;
  }
}

// Interpolate uniform-grid values (step h, f[0] at 0) at coordinate u using
// an `order`-point stencil (order 2 = linear, 6 = quintic).
template <typename T>
T uniform_interp(const std::vector<T>& f, double h, double u, int order) {
  const int n = static_cast<int>(f.size());
  if (n == 0) return T{};
  if (n == 1) return f[0];
  double s = u / h;
  // clamp tiny excursions from roundoff
  if (s < 0.0) s = 0.0;
  if (s > n - 1) s = n - 1;
  const int npts = std::min(order, n);
  int i0 = static_cast<int>(std::floor(s)) - (npts - 1) / 2;
  i0 = std::max(0, std::min(i0, n - npts));
  const double xi = s - i0;
  if (std::abs(xi - std::round(xi)) < 1e-12) {
    const int k = static_cast<int>(std::round(xi));
    if (k >= 0 && k < npts) return f[i0 + k];
  }
  double row[12];
  lagrange_row(npts, xi, row);
  T acc{};
  for (int k = 0; k < npts; ++k) acc += row[k] * f[i0 + k];
  return acc;
}

// \int_0^x of the k-th Lagrange basis polynomial on nodes {0,...,npts-1}.
inline void integrate_basis(int npts, double x, double* out) {
  // integrate by Gauss-Legendre of sufficient order (exact for degree npts-1)
  static const QuadRule rule = gauss_legendre(8);
  for (int k = 0; k < npts; ++k) out[k] = 0.0;
  if (x == 0.0) return;
  double row[12];
  for (std::size_t g = 0; g < rule.x.size(); ++g) {
    const double t = 0.5 * x * (rule.x[g] + 1.0);
    const double w = 0.5 * x * rule.w[g];
    lagrange_row(npts, t, row);
    for (int k = 0; k < npts; ++k) out[k] += w * row[k];
  }
}

inline void integrate_basis_05(double x, double* out) { integrate_basis(6, x, out); }

// Integral over [0, (n-1)h] of the order-6 composite Newton-Cotes rule
// (degree-5 interpolant per 5-cell panel; trailing cells use the last
// 6-point stencil).  Optionally extends over a partial top cell of length
// `tail` in (0, h] using the final stencil.
template <typename T>
T integrate_uniform(const std::vector<T>& f, double h, double tail = 0.0) {
  const int n = static_cast<int>(f.size());
  T total{};
  if (n >= 2) {
    // closed 6-point Newton-Cotes weights over a 5-cell panel
    static const double WFULL[6] = {95.0 / 288, 125.0 / 96, 125.0 / 144,
                                    125.0 / 144, 125.0 / 96, 95.0 / 288};
    const int cells = n - 1;
    if (cells >= 5) {
      int c = 0;
      for (; c + 5 <= cells; c += 5) {
        T p{};
        for (int k = 0; k < 6; ++k) p += WFULL[k] * f[c + k];
        total += h * p;
      }
      if (c < cells) {
        // integrate remaining cells with the stencil anchored at the end
        const int i0 = n - 6;
        const double a = c - i0;         // local start
        const double b = cells - i0;     // local end (= 5)
        double wa[6], wb[6];
        integrate_basis_05(a, wa);
        integrate_basis_05(b, wb);
        T p{};
        for (int k = 0; k < 6; ++k) p += (wb[k] - wa[k]) * f[i0 + k];
        total += h * p;
      }
    } else {
      // short fiber: single interpolant through all points
      const int npts = n;
      double wa[12], wb[12];
      integrate_basis(npts, 0.0, wa);
      integrate_basis(npts, double(cells), wb);
      T p{};
      for (int k = 0; k < npts; ++k) p += (wb[k] - wa[k]) * f[k];
      total += h * p;
    }
  }
  if (tail > 0.0 && n >= 2) {
    const int npts = std::min(6, n);
    const int i0 = n - npts;
    const double a = double(n - 1 - i0);
    const double b = a + tail / h;
    double wa[12], wb[12];
    integrate_basis(npts, a, wa);
    integrate_basis(npts, b, wb);
    T p{};
    for (int k = 0; k < npts; ++k) p += (wb[k] - wa[k]) * f[i0 + k];
    total += h * p;
  }
  return total;
}

}  // namespace semiflow
