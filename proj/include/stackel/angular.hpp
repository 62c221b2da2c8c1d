#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stackel/geometry.hpp"

namespace stackel {

// One periodic row  −y'' + (µ² a + ν² b − φ) y = 0  on [0, 2π].
class HillRow {
 public:
  HillRow(UnivariateFn a, UnivariateFn b, UnivariateFn phi);
  const UnivariateFn& a() const { return a_; }
  const UnivariateFn& b() const { return b_; }
  const UnivariateFn& phi() const { return phi_; }

  struct Table {
    int steps = 0;
    double h = 0.0;
    std::vector<double> a, b, p;  // two Gauss points per step, interleaved
  };
  std::shared_ptr<const Table> table(int steps) const;
  // coarse samples used for bracket estimates
  const std::vector<double>& coarse(int which) const { return coarse_[which]; }
  int steps_for(double mu2, double nu2) const;

 private:
  struct Cache;
  UnivariateFn a_, b_, phi_;
  std::array<std::vector<double>, 3> coarse_;
  std::array<double, 3> bound_{};
  std::shared_ptr<Cache> cache_;
};

// Period map of the row: columns are the solutions with (y, y') = (1, 0) and (0, 1) at x = 0.
struct Monodromy {
  Eigen::Matrix2d M;        // mantissa; true map is M·exp(log_scale)
  double log_scale = 0.0;
  double theta = 0.0;       // Prüfer angle of the second solution at 2π
  double trace() const;     // true trace, saturating at ±1e300
  std::vector<double> xs;   // trajectory (when requested): nodes and both solutions with derivatives
  std::vector<Eigen::Matrix2d> traj;
};
Monodromy hill_monodromy(const HillRow& row, double mu2, double nu2, bool trajectory = false);

// Periodic solution sampled at the integrator nodes; cubic Hermite in between.
struct PeriodicMode {
  double h = 0.0;
  std::vector<double> y, dy;
  double operator()(double x) const;
  std::vector<double> sample(int n) const;  // n uniform points on [0, 2π)
};

struct AngularOperators {
  HillRow row2, row3;       // separated rows along x² and x³ in the working gauge
  Eigen::Matrix2d gauge = Eigen::Matrix2d::Identity();  // (µ², ν²) = gauge·(working pair)
  Eigen::Vector2d shift = Eigen::Vector2d::Zero();      // (B₁, B₂) added to (H, L)
  StackelMatrix S;          // original matrix (for the weight and the original rows)
  Potentials phi;

  static AngularOperators of(const StackelMatrix& S, const Potentials& phi);
  static AngularOperators of(const Model& m) { return of(m.S, m.phi); }
  AngularOperators shifted(double B1, double B2) const;
  double weight(double x2, double x3) const;  // s^{11}
};

// Monodromy traces of the two rows at an original-gauge pair (shift removed).
std::pair<double, double> hill_discriminants(const AngularOperators& ops, double mu2, double nu2);

struct JointEigenpair {
  double mu2 = 0.0, nu2 = 0.0;
  int multiplicity = 1;
  int index2 = -1, index3 = -1;            // periodic eigenvalue indices of the rows (shooting)
  std::vector<PeriodicMode> v, w;          // bases of the periodic solution spaces
  double residual_v = 0.0, residual_w = 0.0;
  std::vector<Eigen::VectorXd> modes;      // oracle only: eigenfunctions on its N×N grid
};

struct SpectrumRequest {
  double mu2_max = 0.0;   // collect every pair with µ² ≤ mu2_max (when > 0)
  int count = 0;          // or the first `count` pairs in (µ², ν²) order
  bool eigenfunctions = true;
};

std::vector<JointEigenpair> joint_spectrum_shooting(const AngularOperators& ops, const SpectrumRequest& req);
// The joint eigenvalue with periodic eigenvalue indices (index2, index3) of the two rows.
JointEigenpair joint_eigenpair(const AngularOperators& ops, int index2, int index3, bool eigenfunctions = false);
std::vector<JointEigenpair> joint_spectrum_oracle(const AngularOperators& ops, int N, int count);

// Separated modes Y = v·w of one joint eigenspace on an N2×N3 grid (index j*N3 + k), orthonormal in the
// s^{11}-weighted trapezoid inner product; order (cc, cs, sc, ss).
std::vector<Eigen::VectorXd> joint_modes(const AngularOperators& ops, const JointEigenpair& p, int N2, int N3);

// Fourier collocation of (H, L) on an N×N grid, in the working gauge.
struct AngularDiscretization {
  int N = 0;
  Eigen::MatrixXd KH, KL;   // symmetric
  Eigen::VectorXd sigma;    // s^{11} at the nodes
};
AngularDiscretization discretize_angular(const AngularOperators& ops, int N);
// ‖HL − LH‖_F / (‖H‖_F ‖L‖_F) with H = σ⁻¹K_H, L = σ⁻¹K_L.
double commutator_norm(const AngularDiscretization& d);
// Residual of Y = v·w under the discretized operators, relative to ‖Y‖.
std::pair<double, double> discrete_eigen_residual(const AngularOperators& ops, const JointEigenpair& p, int N);

struct ConeDensityReport {
  double epsilon = 0.0, c1 = 0.0, c2 = 0.0;
  std::vector<std::pair<double, double>> pairs_in_cone;  // (µ, ν)
  double h_min = 0.0;
  std::vector<double> radii, density;                    // N(r)/r²
  double C1 = 0.0, D1 = 0.0, C2 = 0.0, D2 = 0.0;
  double min_ratio = 0.0, max_ratio = 0.0;               // over all nonzero pairs
};
// `radius` is the largest r for which the pair list is complete.
ConeDensityReport cone_density(const std::vector<JointEigenpair>& pairs, double c1, double c2, double epsilon, double radius,
                               int min_pairs = 50);

void write_spectrum_csv(const std::string& path, const std::vector<JointEigenpair>& pairs);

}  // namespace stackel
