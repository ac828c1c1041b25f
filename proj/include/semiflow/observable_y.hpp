#pragma once

// Complex observables on Y sampled at the per-branch collocation nodes,
// with barycentric evaluation, the discrete Holder norm estimator, the
// mu-integral, and mean projection.

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "semiflow/markov_model.hpp"

namespace semiflow {

struct ObservableY {
  std::shared_ptr<const ChebGrid> grid;
  std::vector<std::vector<cplx>> values;  // [branch][node]

  static ObservableY zeros(std::shared_ptr<const ChebGrid> g) {
    ObservableY v;
    v.grid = std::move(g);
    v.values.assign(v.grid->nodes.size(),
                    std::vector<cplx>(v.grid->nodes_per_branch, cplx{0.0, 0.0}));
    return v;
  }

  static ObservableY from_function(std::shared_ptr<const ChebGrid> g,
                                   const std::function<cplx(double)>& f) {
    ObservableY v = zeros(std::move(g));
    for (std::size_t j = 0; j < v.values.size(); ++j)
      for (int k = 0; k < v.grid->nodes_per_branch; ++k)
        v.values[j][k] = f(v.grid->nodes[j][k]);
    return v;
  }

  // branch-j interpolant at y in Y_j
  cplx eval_on_branch(const MarkovModel& m, int j, double y) const {
    const double xi = grid->ref_coord(m, j, y);
    return barycentric_eval(grid->ref_nodes, grid->bary_w, values[j], xi);
  }

  cplx eval(const MarkovModel& m, double y) const {
    return eval_on_branch(m, m.branch_of(y), y);
  }

  ObservableY& operator+=(const ObservableY& o) {
    for (std::size_t j = 0; j < values.size(); ++j)
      for (std::size_t k = 0; k < values[j].size(); ++k) values[j][k] += o.values[j][k];
    return *this;
  }
  ObservableY& operator*=(cplx c) {
    for (auto& br : values)
      for (auto& x : br) x *= c;
    return *this;
  }
};

// \int_Y v dmu by per-branch Clenshaw-Curtis against the model density.
inline cplx base_integral(const MarkovModel& m, const ObservableY& v) {
  cplx total{};
  for (std::size_t j = 0; j < v.values.size(); ++j)
    for (int k = 0; k < v.grid->nodes_per_branch; ++k) {
      const double y = v.grid->nodes[j][k];
      total += v.grid->leb_w[j][k] * m.density(y) * v.values[j][k];
    }
  return total;
}

inline ObservableY mean_project_Y(const MarkovModel& m, const ObservableY& v) {
  const cplx mean = base_integral(m, v);
  ObservableY out = v;
  for (auto& br : out.values)
    for (auto& x : br) x -= mean;
  return out;
}

struct HolderNormReport {
  double sup_norm = 0.0;
  double holder_seminorm = 0.0;
  double eta = 0.0;
  long pair_count = 0;
  double total() const { return sup_norm + holder_seminorm; }
};

// Discrete estimator over node pairs within each branch; a lower bound on
// the true seminorm.
inline HolderNormReport holder_norm_Y(const ObservableY& v, double eta) {
  if (!(eta > 0.0) || !(eta < 1.0)) throw std::invalid_argument("holder_norm_Y: eta in (0,1)");
  HolderNormReport rep;
  rep.eta = eta;
  const int N = v.grid->nodes_per_branch;
  for (std::size_t j = 0; j < v.values.size(); ++j) {
    for (int k = 0; k < N; ++k) {
      rep.sup_norm = std::max(rep.sup_norm, std::abs(v.values[j][k]));
      for (int k2 = k + 1; k2 < N; ++k2) {
        const double d = std::abs(v.grid->nodes[j][k] - v.grid->nodes[j][k2]);
        if (d < 1e-15) continue;
        const double q = std::abs(v.values[j][k] - v.values[j][k2]) / std::pow(d, eta);
        rep.holder_seminorm = std::max(rep.holder_seminorm, q);
        ++rep.pair_count;
      }
    }
  }
  return rep;
}

}  // namespace semiflow
