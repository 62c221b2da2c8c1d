#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stackel/angular.hpp"
#include "stackel/grid.hpp"
#include "stackel/radial.hpp"

namespace stackel {

// One joint eigenspace of the DN decomposition.
struct DnBlock {
  double mu2 = 0.0, nu2 = 0.0;
  int multiplicity = 1;
  // (ϕ⁰, ϕ¹) ↦ (u'(0), u'(A)) for the radial factor: [[M, 1/Δ], [−1/Δ, −N]]
  Eigen::Matrix2d block;
  double omega_plus = 0.0, omega_minus = 0.0;
  Eigen::Vector2d x_plus, x_minus;
  std::vector<Eigen::VectorXd> modes;  // orthonormal Y on the boundary grid
};

struct BlockEigen {
  double omega_plus = 0.0, omega_minus = 0.0;
  Eigen::Vector2d x_plus, x_minus;
  double residual = 0.0;
};
// Eigen-decomposition of the symmetric matrix [[M, 1/Δ], [1/Δ, N]] built from a block.
BlockEigen block_eigen(const Eigen::Matrix2d& block);

struct DnOperator {
  int N2 = 0, N3 = 0;
  double A = 1.0;
  int truncation = 0;                   // modes kept
  std::vector<DnBlock> blocks;
  std::vector<std::pair<double, double>> withheld;  // joint eigenvalues on the radial Dirichlet spectrum
  // boundary prefactor fields on x¹ = 0 and x¹ = A (index j*N3 + k)
  std::vector<double> H1_0, H1_A, Gamma1_0, Gamma1_A, R_0, R_A;
  Eigen::VectorXd quad_weight;          // s^{11} h2 h3
};

// Blocks for the first eigenspaces of `spectrum` holding at most `max_modes` modes in total.
DnOperator assemble_dn(const Model& model, const AngularOperators& ops, const std::vector<JointEigenpair>& spectrum,
                       int max_modes, int N2, int N3);

struct DnApplication {
  BoundaryData out;
  double projection_residual = 0.0;  // relative, worst of the two tori
  bool truncation_warning = false;   // residual above 1e-3
};
DnApplication apply_dn(const DnOperator& op, const BoundaryData& f);

// Boundary datum R·Σ c_m Y_m on both tori over the first `harmonics` modes, coefficients from the seed.
BoundaryData harmonic_datum(const DnOperator& op, int harmonics, unsigned seed);

void export_dn(const DnOperator& op, const std::string& fixture_hash, const std::string& path_without_ext);

}  // namespace stackel
