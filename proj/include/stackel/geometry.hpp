#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stackel/coordmap.hpp"
#include "stackel/univariate.hpp"

namespace stackel {

using Point3 = std::array<double, 3>;
using Potentials = std::array<UnivariateFn, 3>;
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// 3x3 matrix whose row i depends only on x^i. Angular periods are 2π.
struct StackelMatrix {
  std::array<std::array<UnivariateFn, 3>, 3> s;
  double A = 1.0;

  const UnivariateFn& operator()(int i, int j) const { return s[i][j]; }
  // values of all entries with row i evaluated at x[i]
  Eigen::Matrix3d values(const Point3& x) const;
};

StackelMatrix constant_stackel(const Eigen::Matrix3d& m, double A);

// Positive conformal factor c on the cylinder.
struct ConformalField {
  virtual ~ConformalField() = default;
  virtual double value(const Point3& x) const = 0;
  virtual Point3 dlog(const Point3& x) const = 0;  // ∂_i ln c
  virtual std::optional<double> constant_value() const { return std::nullopt; }
};

struct ConstantConformal final : ConformalField {
  double c;
  explicit ConstantConformal(double c_) : c(c_) {}
  double value(const Point3&) const override { return c; }
  Point3 dlog(const Point3&) const override { return {0.0, 0.0, 0.0}; }
  std::optional<double> constant_value() const override { return c; }
};

// Conformally Stäckel model: G = c^4 g_S, with potentials φ_i.
struct Model {
  StackelMatrix S;
  Potentials phi;
  std::shared_ptr<const ConformalField> c = std::make_shared<ConstantConformal>(1.0);
};

// Determinant and first-column cofactors with their derivatives along each axis.
struct StackelJets {
  double det = 0.0;
  Point3 cof{};        // s^{11}, s^{21}, s^{31}
  Point3 dlog_rho{};   // ∂_i log(det S / (s^{11} s^{21} s^{31}))
  Point3 d2log_rho{};  // ∂_i^2 of the same
};
StackelJets stackel_jets(const StackelMatrix& S, const Point3& x);

struct MetricEval {
  Point3 x{};
  Point3 h_sq{}, H_sq{};
  Point3 cofactors{};
  double detS = 0.0;
  Point3 gamma{}, Gamma{};
  Point3 dgamma{};  // ∂_i γ_i
  double r_factor = 0.0;
  double c = 1.0;
  Point3 dlog_c{};
  double zeroth_order = 0.0;  // −Σ h_i^{-2}(φ_i + γ_i²/4 − ∂_iγ_i/2); zero unless potentials given
};

MetricEval metric_eval(const StackelMatrix& S, const ConformalField& c, const Point3& x);
MetricEval metric_eval(const StackelMatrix& S, const ConformalField& c, const Potentials& phi, const Point3& x);
inline MetricEval metric_eval(const Model& m, const Point3& x) { return metric_eval(m.S, *m.c, m.phi, x); }

struct ValidationItem {
  std::string name;
  bool passed = false;
  double margin = 0.0;  // worst signed margin; positive when the condition holds
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool valid = false;
  double c1 = 0.0, c2 = 0.0;
  const ValidationItem* find(const std::string& name) const;
};

ValidationReport validate_stackel(const StackelMatrix& S, int samples = 16);

StackelMatrix column_gauge(const StackelMatrix& S, const Eigen::Matrix2d& G2);
StackelMatrix first_column_shift(const StackelMatrix& S, double C1, double C2);

// P with T·P in normal sign form (T the angular block); the cone ordering fixes orientation,
// so gauge-equivalent inputs produce identical normalized blocks.
Eigen::Matrix2d canonical_angular_gauge(const StackelMatrix& S, int samples = 64, double pad = 0.1);
// G2 such that column_gauge(S, G2) has the angular sign pattern, if one exists.
std::optional<Eigen::Matrix2d> normalizing_gauge(const StackelMatrix& S, int samples = 64);

// Row transformation by a positive density f: entries divided by f, potential corrected by
// the log-derivative terms, all re-expressed in y = ∫ sqrt(f).
struct TransformedRow {
  CoordinateMap map;
  std::array<UnivariateFn, 3> entries;
  UnivariateFn phi;
};
TransformedRow transform_row(const std::array<UnivariateFn, 3>& entries, const UnivariateFn& phi, const UnivariateFn& f,
                             double length, bool periodic);
// φ/f − L̇²/16 − L̈/4 with L = log f and dots in y, evaluated at the original coordinate x.
double corrected_potential(const UnivariateFn& phi, const UnivariateFn& f, double x);

struct ReparamResult {
  StackelMatrix S;
  Potentials phi;
  std::array<CoordinateMap, 3> maps;
};
ReparamResult reparam(const StackelMatrix& S, const Potentials& phi, const std::array<UnivariateFn, 3>& f);
// Reparametrized model; the conformal factor is transported by composition.
Model reparam_model(const Model& m, const std::array<UnivariateFn, 3>& f);

struct RadialNormalForm {
  double Abar = 0.0;
  CoordinateMap map;       // u(x) and x(u)
  UnivariateFn s13bar;     // s13/s12 as a function of u
  UnivariateFn phi1bar;    // corrected potential as a function of u
  double s12_0 = 1.0, s12_A = 1.0, ds12_0 = 0.0, ds12_A = 0.0;
};
RadialNormalForm radial_normal_form(const StackelMatrix& S, const UnivariateFn& phi1);
RadialNormalForm radial_normal_form(const UnivariateFn& s12, const UnivariateFn& s13, const UnivariateFn& phi1, double A);

// Potentials giving c ≡ 1 when at most one row is non-constant (closed-form rows only).
std::optional<Potentials> compatible_potentials(const StackelMatrix& S);

// Zeroth-order coefficient at a point (the conformal-factor equation).
double zeroth_order_at(const StackelMatrix& S, const Potentials& phi, const Point3& x);

}  // namespace stackel
