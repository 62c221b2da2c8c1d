#pragma once

#include "stackel/fixture.hpp"
#include "stackel/grid.hpp"

namespace stackel {

struct ZerothOrderField {
  ScalarField3 field;
  bool nonnegative = false;  // sign condition on the zeroth-order term
  double min = 0.0, max = 0.0;
};

// −Σ h_i^{-2}(φ_i + γ_i²/4 − ∂_iγ_i/2) at every grid node.
ZerothOrderField zeroth_order_coefficient(const StackelMatrix& S, const Potentials& phi, const Grid3& grid);

struct ConformalSolution {
  ScalarField3 c;
  double residual = 0.0;
  int iterations = 0;
  bool coefficient_nonnegative = false;
  bool coefficient_nonpositive = false;
  // bounds that the maximum principle guarantees for this coefficient sign, checked to 1e-9
  bool upper_bound_checked = false, lower_bound_checked = false;
};

// Dirichlet problem −Δ_g c + Z c = 0, c = η on both tori.
ConformalSolution solve_conformal(const StackelMatrix& S, const Potentials& phi, const BoundaryData& eta, const Grid3& grid,
                                  double tol = 1e-10);

struct AlphaReport {
  ScalarField3 alpha;
  std::array<ScalarField3, 3> g0_inverse;  // 1/s^{i1}
  ScalarField3 Q1, Q2;                     // −Δ_{g0}β/β with β = α^{1/4}, interior nodes
  double max_diff = 0.0, max_Q1 = 0.0, relative = 0.0;
  double literal_max_diff = 0.0;           // same with α itself in place of β
};

// Compares the zeroth-order coefficients recovered from two conformal solutions.
AlphaReport alpha_pde_check(const StackelMatrix& S, const ScalarField3& c1, const ScalarField3& c2);

// Model of a fixture; the conformal factor is 1 when the zeroth-order term vanishes,
// otherwise it solves the Dirichlet problem with η ≡ 1 on an n³ grid.
Model build_model(const Fixture& fx, int n = 32);

}  // namespace stackel
