#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "stackel/geometry.hpp"

namespace stackel {

using cplx = std::complex<double>;

struct SpectralPair {
  cplx mu2, nu2;
};

// Radial equation  −u'' + (µ² s12 + ν² s13 − φ1) u = 0  on [0, A].
class RadialRow {
 public:
  RadialRow(UnivariateFn s12, UnivariateFn s13, UnivariateFn phi1, double A);
  static RadialRow of(const Model& m);
  static RadialRow of(const StackelMatrix& S, const Potentials& phi);
  static RadialRow of(const RadialNormalForm& nf);  // unit s12, reduced s13, corrected potential

  const UnivariateFn& s12() const { return s12_; }
  const UnivariateFn& s13() const { return s13_; }
  const UnivariateFn& phi1() const { return phi1_; }
  double A() const { return A_; }

  struct Table {
    int steps = 0;
    double h = 0.0;
    std::vector<double> a, b, p;  // s12, s13, φ1 at the 2*steps+1 half nodes
  };
  std::shared_ptr<const Table> table(int steps) const;
  int steps_for(const SpectralPair& p, double step_scale, int min_steps) const;
  double max_abs_s12() const { return bounds_[0]; }
  double max_abs_s13() const { return bounds_[1]; }

 private:
  struct Cache;
  UnivariateFn s12_, s13_, phi1_;
  double A_;
  std::array<double, 3> bounds_{};
  std::shared_ptr<Cache> cache_;
};

struct FssOptions {
  double step_scale = 0.01;  // h ≤ step_scale / (1 + k)
  int min_steps = 2000;
  bool high_precision = false;  // Wronskians from a 50-digit accumulation of the step matrices
  bool trajectory = false;
};

// Cosine/sine type solutions launched at each end. Family 0 starts at x = 0 and is reported at
// x = A; family 1 starts at x = A and is reported at x = 0. Values are mantissas: the true
// value is mantissa · exp(log_scale) of the family.
struct FssData {
  cplx c0, dc0, s0, ds0;  // at A
  double log_scale0 = 0.0;
  cplx c1, dc1, s1, ds1;  // at 0
  double log_scale1 = 0.0;
  cplx W0, W1;            // W(c0,s0), W(c1,s1) at the far end
  int steps = 0;
  std::vector<double> xs;                     // trajectory nodes (if requested)
  std::vector<std::array<cplx, 4>> traj0;     // c0, c0', s0, s0'
  std::vector<std::array<cplx, 4>> traj1;     // c1, c1', s1, s1' on the same nodes
};

FssData fss(const RadialRow& row, const SpectralPair& p, const FssOptions& opt = {});

struct WTData {
  cplx Delta, D, E;     // mantissas sharing log_scale
  double log_scale = 0.0;
  cplx M, N;            // NaN when is_pole
  bool is_pole = false;
  double weyl_residual_A = 0.0;  // |Ψ(A)| relative
  double weyl_residual_0 = 0.0;  // |Φ(0)| relative
  cplx Delta_value() const { return Delta * std::exp(log_scale); }
  cplx D_value() const { return D * std::exp(log_scale); }
  cplx E_value() const { return E * std::exp(log_scale); }
  cplx inv_Delta() const { return std::exp(-log_scale) / Delta; }
};

WTData wt(const FssData& f);
WTData wt(const RadialRow& row, const SpectralPair& p, const FssOptions& opt = {});
// Throws PoleAtDirichletEigenvalue on poles.
WTData wt_regular(const RadialRow& row, const SpectralPair& p, const FssOptions& opt = {});

// (φ⁰, φ¹) ↦ (u'(0), u'(A)) for the solution with u(0) = φ⁰, u(A) = φ¹.
Eigen::Matrix2cd bvp_derivative_map(const WTData& w);

struct LiouvilleReport {
  cplx Delta_q, D_q, M_q;  // values (not mantissas) relative to log_scale_q
  double log_scale_q = 0.0;
  double res_delta = 0.0, res_D = 0.0, res_M = 0.0;  // relative link residuals
};
LiouvilleReport liouville_wt(const RadialNormalForm& nf, const RadialRow& row, const SpectralPair& p);

struct AsymptoticRow {
  cplx mu;
  double r_delta = 0.0, r_D = 0.0;
};
std::vector<AsymptoticRow> asymptotic_residuals(const RadialNormalForm& nf, cplx nu2, const std::vector<cplx>& mus);

struct OmegaForm {
  double omega = 0.0, Cbar = 0.0, rmin = 0.0, rmax = 0.0;
  double Delta_q = 0.0, D_q = 0.0;
  double res_delta = 0.0, res_D = 0.0;      // link residuals, relative
  double asym_delta = 0.0, asym_D = 0.0;    // |Δ_q − sin(C̄ω)/ω|·ω², |D_q − cos(C̄ω)|·ω
};
OmegaForm omega_form(const RadialRow& row, double y, double yp);

struct CamEvaluation {
  cplx F;              // mantissa
  double log_scale = 0.0;
  double relative = 0.0;  // |F| / (|DΔ̃| + |D̃Δ|)
  double log_abs = 0.0;   // log |F|
  double log_bound_scale = 0.0;  // log(|DΔ̃| + |D̃Δ|)
};
CamEvaluation cam_F(const RadialRow& a, const RadialRow& b, cplx mu, cplx nu);

// Length ∫ sqrt(s) over [0, A].
double root_length(const UnivariateFn& s, double A);

// Slope of log(binned maxima of y) against log(x); near zero or negative means bounded.
double growth_exponent(const std::vector<double>& x, const std::vector<double>& y, int bins = 8);

void write_wt_csv(const std::string& path, const std::vector<std::pair<SpectralPair, WTData>>& rows);

}  // namespace stackel
