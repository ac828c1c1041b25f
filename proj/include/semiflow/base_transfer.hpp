#pragma once

// Transfer operator of the base map and its Laplace-frequency twist:
//   (R0 v)(y)      = sum_j g(psi_j y) v(psi_j y)
//   (R0^(s) v)(y)  = R0(e^{-s phi} v)
// plus the dense collocation matrix acting on stacked per-branch node
// values (branch-major, node-minor; deterministic assembly order).

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

#include "semiflow/markov_model.hpp"
#include "semiflow/observable_y.hpp"
#include "semiflow/roof.hpp"

namespace semiflow {

inline ObservableY apply_R0(const MarkovModel& m, const ObservableY& v) {
  ObservableY out = ObservableY::zeros(v.grid);
  const int J = m.branch_count();
  const int N = v.grid->nodes_per_branch;
  for (int jb = 0; jb < J; ++jb) {
    for (int k = 0; k < N; ++k) {
      const double y = v.grid->nodes[jb][k];
      cplx acc{};
      for (int j = 0; j < J; ++j) {
        const double x = m.branches[j].inverse(y);
        acc += m.branches[j].weight(y) * v.eval_on_branch(m, j, x);
      }
      out.values[jb][k] = acc;
    }
  }
  return out;
}

inline void check_twist_range(const RoofFunction& roof, cplx s, double sup_phi) {
  if (s.real() < 0.0 && -s.real() * sup_phi > 700.0)
    throw std::range_error("apply_twisted_R0: Re(s)*phi exceeds the exponent budget");
  (void)roof;
}

inline ObservableY apply_twisted_R0(const MarkovModel& m, const RoofFunction& roof, cplx s,
                                    const ObservableY& v) {
  // crude sup for the overflow guard
  double sup_phi = 0.0;
  for (std::size_t j = 0; j < v.grid->nodes.size(); ++j)
    for (int k = 0; k < v.grid->nodes_per_branch; ++k)
      sup_phi = std::max(sup_phi, roof.phi(v.grid->nodes[j][k]));
  check_twist_range(roof, s, sup_phi);

  ObservableY out = ObservableY::zeros(v.grid);
  const int J = m.branch_count();
  const int N = v.grid->nodes_per_branch;
  for (int jb = 0; jb < J; ++jb) {
    for (int k = 0; k < N; ++k) {
      const double y = v.grid->nodes[jb][k];
      cplx acc{};
      for (int j = 0; j < J; ++j) {
        const double x = m.branches[j].inverse(y);
        acc += m.branches[j].weight(y) * std::exp(-s * roof.phi(x)) * v.eval_on_branch(m, j, x);
      }
      out.values[jb][k] = acc;
    }
  }
  return out;
}

struct OperatorMatrix {
  Eigen::MatrixXcd mat;  // (J*N) x (J*N), branch-major stacking
  cplx s{};
  int nodes_per_branch = 0;
  int branch_count = 0;
};

// Stack/unstack helpers (branch-major, node-minor).
inline Eigen::VectorXcd stack_observable(const ObservableY& v) {
  const int J = static_cast<int>(v.values.size());
  const int N = v.grid->nodes_per_branch;
  Eigen::VectorXcd x(J * N);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) x[j * N + k] = v.values[j][k];
  return x;
}

inline ObservableY unstack_observable(std::shared_ptr<const ChebGrid> grid,
                                      const Eigen::VectorXcd& x) {
  ObservableY v = ObservableY::zeros(std::move(grid));
  const int J = static_cast<int>(v.values.size());
  const int N = v.grid->nodes_per_branch;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) v.values[j][k] = x[j * N + k];
  return v;
}

// Dense collocation matrix of the twisted operator at s.
inline OperatorMatrix assemble_twisted_matrix(const MarkovModel& m, const RoofFunction& roof,
                                              cplx s, const ChebGrid& grid) {
  const int J = m.branch_count();
  const int N = grid.nodes_per_branch;
  double sup_phi = 0.0;
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < N; ++k) sup_phi = std::max(sup_phi, roof.phi(grid.nodes[j][k]));
  check_twist_range(roof, s, sup_phi);

  OperatorMatrix op;
  op.s = s;
  op.nodes_per_branch = N;
  op.branch_count = J;
  op.mat = Eigen::MatrixXcd::Zero(J * N, J * N);
  for (int jb = 0; jb < J; ++jb) {
    for (int k = 0; k < N; ++k) {
      const int row = jb * N + k;
      const double y = grid.nodes[jb][k];
      for (int j = 0; j < J; ++j) {
        const double x = m.branches[j].inverse(y);
        const cplx coeff = m.branches[j].weight(y) * std::exp(-s * roof.phi(x));
        const auto c = barycentric_weight_row(grid.ref_nodes, grid.bary_w,
                                              grid.ref_coord(m, j, x));
        for (int kk = 0; kk < N; ++kk) op.mat(row, j * N + kk) += coeff * c[kk];
      }
    }
  }
  return op;
}

inline ObservableY apply_matrix(const OperatorMatrix& op, const ObservableY& v) {
  return unstack_observable(v.grid, op.mat * stack_observable(v));
}

}  // namespace semiflow
