#pragma once

// Full-branch Gibbs-Markov base maps on Y = [0,1): branch intervals Y_j,
// inverse branches psi_j, weight functions y -> g(psi_j y), and branch
// measures.  Countable families are supported by truncation; the dropped
// mass is carried explicitly and enters every validation budget.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiflow/grid.hpp"

namespace semiflow {

struct Branch {
  double lo = 0.0, hi = 1.0;              // Y_j = [lo, hi)
  std::function<double(double)> inverse;  // psi_j : Y -> Y_j, contraction
  std::function<double(double)> forward;  // F restricted to Y_j
  std::function<double(double)> weight;   // y -> g(psi_j y)
  double measure = 0.0;                   // mu(Y_j)
};

struct MarkovModel {
  std::string name;
  std::vector<Branch> branches;
  double expansion = 2.0;                   // lambda
  double truncation_tail_mass = 0.0;        // mass of dropped branches
  std::function<double(double)> mu_density; // d mu / d Leb on Y (builtins: 1)

  int branch_count() const { return static_cast<int>(branches.size()); }

  int branch_of(double y) const {
    int lo = 0, hi = branch_count() - 1;
    if (y <= branches.front().lo) return 0;
    if (y >= branches.back().hi) return hi;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (branches[mid].lo <= y)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  double map_forward(double y) const { return branches[branch_of(y)].forward(y); }

  double density(double y) const { return mu_density ? mu_density(y) : 1.0; }
};

// ---------------------------------------------------------------------------
// Builtin models
// ---------------------------------------------------------------------------

// Full-branch piecewise-affine map with branch lengths `len` (Lebesgue
// invariant; g = len_j on branch j).  Sum of lengths may be < 1 for
// truncated countable families; the remainder is the tail mass.
inline MarkovModel make_affine_markov(const std::vector<double>& len,
                                      const std::string& name = "affine") {
  MarkovModel m;
  m.name = name;
  double lo = 0.0;
  for (double l : len) {
    if (l <= 0.0 || l >= 1.0) throw std::invalid_argument("branch length out of (0,1)");
    Branch b;
    b.lo = lo;
    b.hi = lo + l;
    const double a = lo;
    b.inverse = [a, l](double y) { return a + l * y; };
    b.forward = [a, l](double y) { return (y - a) / l; };
    b.weight = [l](double) { return l; };
    b.measure = l;
    m.branches.push_back(std::move(b));
    lo += l;
  }
  if (lo > 1.0 + 1e-12) throw std::invalid_argument("branch lengths exceed 1");
  m.truncation_tail_mass = std::max(0.0, 1.0 - lo);
  m.expansion = 1.0 / *std::max_element(len.begin(), len.end());  // weakest branch
  m.mu_density = [](double) { return 1.0; };
  return m;
}

// Doubling map: two equal branches, g = 1/2.
inline MarkovModel make_doubling() { return make_affine_markov({0.5, 0.5}, "doubling"); }

// Truncated countable family with mu(Y_j) = 2^-j, j = 1..jmax.
inline MarkovModel make_geometric(int jmax) {
  std::vector<double> len(jmax);
  for (int j = 0; j < jmax; ++j) len[j] = std::ldexp(1.0, -(j + 1));
  return make_affine_markov(len, "geometric");
}

// Doubling-shaped model with prescribed constant weights (possibly not a
// partition of unity); used to exercise validator failures.
inline MarkovModel make_weighted_doubling(double w0, double w1) {
  MarkovModel m = make_doubling();
  m.name = "weighted";
  m.branches[0].weight = [w0](double) { return w0; };
  m.branches[1].weight = [w1](double) { return w1; };
  return m;
}

// ---------------------------------------------------------------------------
// Collocation grid: per-branch Chebyshev-Gauss-Lobatto nodes.
// ---------------------------------------------------------------------------

struct ChebGrid {
  int nodes_per_branch = 0;
  std::vector<double> ref_nodes;              // CGL on [-1,1], increasing
  std::vector<double> bary_w;                 // barycentric weights
  std::vector<double> cc_ref;                 // Clenshaw-Curtis on [-1,1]
  std::vector<std::vector<double>> nodes;     // [branch][k] on Y
  std::vector<std::vector<double>> leb_w;     // [branch][k]: Lebesgue CC weights

  static std::shared_ptr<const ChebGrid> build(const MarkovModel& m, int N) {
    auto g = std::make_shared<ChebGrid>();
    g->nodes_per_branch = N;
    g->ref_nodes = cgl_nodes(N);
    g->bary_w = cgl_barycentric_weights(N);
    g->cc_ref = clenshaw_curtis_weights(N);
    g->nodes.resize(m.branch_count());
    g->leb_w.resize(m.branch_count());
    for (int j = 0; j < m.branch_count(); ++j) {
      const auto& b = m.branches[j];
      const double mid = 0.5 * (b.lo + b.hi), half = 0.5 * (b.hi - b.lo);
      g->nodes[j].resize(N);
      g->leb_w[j].resize(N);
      for (int k = 0; k < N; ++k) {
        g->nodes[j][k] = mid + half * g->ref_nodes[k];
        g->leb_w[j][k] = half * g->cc_ref[k];
      }
    }
    return g;
  }

  // reference coordinate of y within branch j
  double ref_coord(const MarkovModel& m, int j, double y) const {
    const auto& b = m.branches[j];
    return (2.0 * y - b.lo - b.hi) / (b.hi - b.lo);
  }

  int total_nodes() const { return static_cast<int>(nodes.size()) * nodes_per_branch; }
};

// ---------------------------------------------------------------------------
// Gibbs-Markov validation
// ---------------------------------------------------------------------------

struct CheckRecord {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckRecord> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const CheckRecord* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Checks the partition of unity, the eq:GM-type weight bounds (reported
// constants), branch contraction, and the partition mass defect.
inline ValidationReport validate_gibbs_markov(const MarkovModel& m, const ChebGrid& grid,
                                              double tol) {
  if (tol <= 0.0) throw std::invalid_argument("validate_gibbs_markov: tol > 0 required");
  ValidationReport rep;
  const int J = m.branch_count();
  const int N = grid.nodes_per_branch;
  const double tail = m.truncation_tail_mass;

  // partition of unity at every collocation node
  double sum_defect = 0.0;
  bool weights_ok = true;
  for (int jb = 0; jb < J; ++jb) {
    for (int k = 0; k < N; ++k) {
      const double y = grid.nodes[jb][k];
      double s = 0.0;
      for (int j = 0; j < J; ++j) {
        const double w = m.branches[j].weight(y);
        if (!(w > 0.0) || w > 1.0 + 1e-12) weights_ok = false;
        s += w;
      }
      sum_defect = std::max(sum_defect, std::abs(s - 1.0));
    }
  }
  rep.checks.push_back({"partition_of_unity", sum_defect, tol + tail,
                        sum_defect <= tol + tail,
                        "max_y |sum_j g(psi_j y) - 1|, budget tol + tail mass"});
  rep.checks.push_back({"weights_in_range", weights_ok ? 0.0 : 1.0, 0.0, weights_ok,
                        "0 < g <= 1 at all nodes"});

  // mass defect
  double mass = 0.0;
  for (const auto& b : m.branches) mass += b.measure;
  const double mass_defect = std::abs(mass - (1.0 - tail));
  rep.checks.push_back({"partition_mass", mass_defect, tol, mass_defect <= tol,
                        "|sum_j mu(Y_j) - (1 - tail)|"});

  // eq:GM constants: g <= C mu(Y_j) and Holder-in-weight with the same C
  double c_sup = 0.0;
  for (int j = 0; j < J; ++j)
    for (int jb = 0; jb < J; ++jb)
      for (int k = 0; k < N; ++k)
        c_sup = std::max(c_sup, m.branches[j].weight(grid.nodes[jb][k]) / m.branches[j].measure);
  rep.checks.push_back({"gm_sup_constant", c_sup, 0.0, std::isfinite(c_sup),
                        "max g(psi_j y) / mu(Y_j) (reported)"});

  const double eta_probe = 0.5;  // constant reported against a fixed exponent
  double c_holder = 0.0;
  for (int j = 0; j < J; ++j) {
    for (int jb = 0; jb < J; ++jb) {
      for (int k = 0; k < N; ++k) {
        for (int k2 = k + 1; k2 < N; ++k2) {
          const double y = grid.nodes[jb][k], y2 = grid.nodes[jb][k2];
          const double d = std::abs(y - y2);
          if (d < 1e-14) continue;
          const double num = std::abs(m.branches[j].weight(y) - m.branches[j].weight(y2));
          c_holder = std::max(c_holder, num / (m.branches[j].measure * std::pow(d, eta_probe)));
        }
      }
    }
  }
  rep.checks.push_back({"gm_holder_constant", c_holder, 0.0, std::isfinite(c_holder),
                        "max |g(psi_j y)-g(psi_j y')| / (mu(Y_j) d^eta), eta=0.5 (reported)"});

  // contraction: d(psi_j y, psi_j y') <= d(y,y') / lambda
  double lambda_emp = INFINITY;
  for (int j = 0; j < J; ++j) {
    for (int jb = 0; jb < J; ++jb) {
      for (int k = 0; k < N; ++k) {
        for (int k2 = k + 1; k2 < N; ++k2) {
          const double y = grid.nodes[jb][k], y2 = grid.nodes[jb][k2];
          const double d = std::abs(y - y2);
          if (d < 1e-14) continue;
          const double dc = std::abs(m.branches[j].inverse(y) - m.branches[j].inverse(y2));
          if (dc > 0.0) lambda_emp = std::min(lambda_emp, d / dc);
        }
      }
    }
  }
  rep.checks.push_back({"expansion", lambda_emp, m.expansion * (1.0 - 1e-10),
                        lambda_emp >= m.expansion * (1.0 - 1e-10),
                        "empirical lambda = min d(y,y')/d(psi y, psi y')"});

  // inverse branches land in their intervals
  bool rng_ok = true;
  for (int j = 0; j < J; ++j)
    for (int jb = 0; jb < J; ++jb)
      for (int k = 0; k < N; ++k) {
        const double x = m.branches[j].inverse(grid.nodes[jb][k]);
        if (x < m.branches[j].lo - 1e-12 || x > m.branches[j].hi + 1e-12) rng_ok = false;
      }
  rep.checks.push_back({"inverse_branch_range", rng_ok ? 0.0 : 1.0, 0.0, rng_ok,
                        "psi_j(Y) inside [lo_j, hi_j]"});

  return rep;
}

}  // namespace semiflow
