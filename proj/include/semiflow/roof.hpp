#pragma once

// Roof functions phi : Y -> [2, oo) with Holder control against d(Fy, Fy')
// and exponential-tail accounting for truncated countable partitions.

#include <cmath>
#include <functional>
#include <string>

#include "semiflow/markov_model.hpp"

namespace semiflow {

struct RoofFunction {
  std::string name;
  std::function<double(double)> phi;
  double delta0 = 1.0;  // tail weight used in the exp-tails report
};

inline RoofFunction make_cosine_roof(double mean = 2.5, double amplitude = 0.5) {
  RoofFunction r;
  r.name = "cosine";
  r.phi = [mean, amplitude](double y) { return mean + amplitude * std::cos(2.0 * kPi * y); };
  return r;
}

inline RoofFunction make_constant_roof(double value = 2.0) {
  RoofFunction r;
  r.name = "constant";
  r.phi = [value](double) { return value; };
  return r;
}

inline RoofFunction make_affine_roof(double a, double b) {
  RoofFunction r;
  r.name = "affine";
  r.phi = [a, b](double y) { return a + b * y; };
  return r;
}

// Per-branch step roof for truncated countable models: phi = base + inc*(j-1)
// on branch j.  Tail sums stay finite as long as e^{delta0*inc} < 1/ratio of
// the branch measures.
inline RoofFunction make_step_roof(const MarkovModel& m, double base = 2.0, double inc = 0.25) {
  RoofFunction r;
  r.name = "step";
  std::vector<double> lo(m.branch_count());
  for (int j = 0; j < m.branch_count(); ++j) lo[j] = m.branches[j].lo;
  const double top = m.branches.back().hi;
  r.phi = [lo, top, base, inc](double y) {
    int b = 0, hi = static_cast<int>(lo.size()) - 1;
    if (y >= lo.back())
      b = hi;
    else {
      int l = 0;
      while (l < hi) {
        const int mid = (l + hi + 1) / 2;
        if (lo[mid] <= y)
          l = mid;
        else
          hi = mid - 1;
      }
      b = l;
    }
    (void)top;
    return base + inc * b;
  };
  return r;
}

struct RoofReport {
  ValidationReport validation;
  double inf_phi = 0.0;
  double sup_phi = 0.0;
  double holder_constant = 0.0;
  double tail_sum = 0.0;
  double mean = 0.0;
};

// Reports inf phi (>= 2 required), the Holder constant of phi in inverse
// coordinates, the delta0 tail sum, and phi_bar.
inline RoofReport validate_roof(const MarkovModel& m, const ChebGrid& grid,
                                const RoofFunction& roof, double tol = 1e-10) {
  RoofReport out;
  const int J = m.branch_count();
  const int N = grid.nodes_per_branch;

  double inf_phi = INFINITY, sup_phi = -INFINITY;
  // probe on nodes plus a fine sweep of each branch
  for (int j = 0; j < J; ++j) {
    const auto& b = m.branches[j];
    for (int k = 0; k < N; ++k) {
      const double p = roof.phi(grid.nodes[j][k]);
      inf_phi = std::min(inf_phi, p);
      sup_phi = std::max(sup_phi, p);
    }
    const int probes = 257;
    for (int i = 0; i <= probes; ++i) {
      const double y = b.lo + (b.hi - b.lo) * i / probes;
      const double p = roof.phi(std::min(y, b.hi - 1e-13));
      inf_phi = std::min(inf_phi, p);
      sup_phi = std::max(sup_phi, p);
    }
  }
  out.inf_phi = inf_phi;
  out.sup_phi = sup_phi;
  out.validation.checks.push_back({"roof_minimum", inf_phi, 2.0 - tol, inf_phi >= 2.0 - tol,
                                   "inf phi >= 2"});

  // |phi(psi_j z) - phi(psi_j z')| <= C d(z,z')^eta over node pairs
  const double eta_probe = 0.5;
  double c_holder = 0.0;
  for (int j = 0; j < J; ++j) {
    for (int jb = 0; jb < J; ++jb) {
      for (int k = 0; k < N; ++k) {
        for (int k2 = k + 1; k2 < N; ++k2) {
          const double z = grid.nodes[jb][k], z2 = grid.nodes[jb][k2];
          const double d = std::abs(z - z2);
          if (d < 1e-14) continue;
          const double num =
              std::abs(roof.phi(m.branches[j].inverse(z)) - roof.phi(m.branches[j].inverse(z2)));
          c_holder = std::max(c_holder, num / std::pow(d, eta_probe));
        }
      }
    }
  }
  out.holder_constant = c_holder;
  out.validation.checks.push_back({"roof_holder_constant", c_holder, 0.0,
                                   std::isfinite(c_holder), "reported, eta=0.5"});

  // exponential-tails report: sum_j mu(Y_j) e^{delta0 sup_j phi}
  double tail_sum = 0.0;
  for (int j = 0; j < J; ++j) {
    double sup_j = -INFINITY;
    for (int k = 0; k < N; ++k) sup_j = std::max(sup_j, roof.phi(grid.nodes[j][k]));
    tail_sum += m.branches[j].measure * std::exp(roof.delta0 * sup_j);
  }
  out.tail_sum = tail_sum;
  out.validation.checks.push_back({"roof_tail_sum", tail_sum, 0.0, std::isfinite(tail_sum),
                                   "sum_j mu(Y_j) e^{delta0 |phi|_j} (reported)"});

  // mean
  double mean = 0.0;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) {
      const double y = grid.nodes[j][k];
      mean += grid.leb_w[j][k] * m.density(y) * roof.phi(y);
    }
  out.mean = mean;
  out.validation.checks.push_back({"roof_mean", out.mean, 0.0, std::isfinite(out.mean),
                                   "phi_bar by quadrature (reported)"});
  return out;
}

}  // namespace semiflow
