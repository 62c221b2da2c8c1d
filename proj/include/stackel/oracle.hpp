#pragma once

#include <array>
#include <string>
#include <vector>

#include "stackel/dn.hpp"
#include "stackel/grid.hpp"

namespace stackel {

// Metric of a model sampled at the grid nodes.
struct SampledMetric {
  Grid3 grid;
  std::array<std::vector<double>, 3> H;  // H_i
  std::vector<double> sqrt_det;          // H1 H2 H3
};
SampledMetric sample_metric(const Model& model, const Grid3& grid);

// Laplace–Beltrami in divergence form: κ_i = √|G| G^{ii} = H1H2H3 / H_i².
class DiscreteLaplaceSystem {
 public:
  explicit DiscreteLaplaceSystem(SampledMetric m);
  const SampledMetric& metric() const { return metric_; }
  const DivergenceSystem& system() const { return sys_; }
  double symmetry_defect() const { return sys_.symmetry_defect(); }
  double constant_defect() const;  // max |K·1| over interior rows, relative to the diagonal
  DivergenceSystem::Solution solve(const BoundaryData& f, double tol = 1e-10) const { return sys_.solve(f, tol); }

 private:
  SampledMetric metric_;
  DivergenceSystem sys_;
};

ScalarField3 solve_laplace(const DiscreteLaplaceSystem& sys, const BoundaryData& f, double tol = 1e-10);

// Outward normal derivative from a second-order one-sided difference, scaled by ∓1/H₁.
BoundaryData dn_oracle(const SampledMetric& m, const ScalarField3& u);
BoundaryData dn_oracle(const DiscreteLaplaceSystem& sys, const BoundaryData& f, double tol = 1e-10);

// Relative discrete L² difference over both tori.
double relative_l2(const BoundaryData& a, const BoundaryData& ref);

struct ConvergenceRow {
  int grid = 0;
  int datum = 0;
  double rel_err = 0.0;
};
struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::vector<double> datum_order;  // fitted order per datum
  double order = 0.0;               // fitted order of the RMS error over all data
  double min_order = 0.0, max_order = 0.0;
  double max_projection_residual = 0.0;
};
// Separated DN against the finite-difference oracle on cube grids, for `data` harmonic test data.
ConvergenceReport compare_dn(const Model& model, const AngularOperators& ops, const std::vector<JointEigenpair>& spectrum,
                             const std::vector<int>& grids, int data, int harmonics, unsigned seed, int max_modes = 64);

// Slope of −log(err) against log(N).
double fitted_order(const std::vector<int>& grids, const std::vector<double>& errs);

void write_convergence_csv(const std::string& path, const ConvergenceReport& r);

}  // namespace stackel
