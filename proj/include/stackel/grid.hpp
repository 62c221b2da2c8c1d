#pragma once

#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "stackel/geometry.hpp"

namespace stackel {

// Tensor grid on [0,A]×T²: N1+1 nodes in x¹ (both ends included), N2×N3 periodic nodes.
struct Grid3 {
  int N1 = 16, N2 = 16, N3 = 16;
  double A = 1.0;

  static Grid3 cube(int n, double A) { return {n, n, n, A}; }
  double h1() const { return A / N1; }
  double h2() const { return kTwoPi / N2; }
  double h3() const { return kTwoPi / N3; }
  size_t size() const { return static_cast<size_t>(N1 + 1) * N2 * N3; }
  size_t index(int i, int j, int k) const { return (static_cast<size_t>(i) * N2 + j) * N3 + k; }
  Point3 coord(int i, int j, int k) const { return {i * h1(), j * h2(), k * h3()}; }
  void check() const;
};

struct ScalarField3 {
  Grid3 grid;
  std::vector<double> v;

  ScalarField3() = default;
  explicit ScalarField3(const Grid3& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
  double& at(int i, int j, int k) { return v[grid.index(i, j, k)]; }
  double at(int i, int j, int k) const { return v[grid.index(i, j, k)]; }
  double min() const;
  double max() const;
};

// Values on the two boundary tori x¹ = 0 and x¹ = A, index j*N3 + k.
struct BoundaryData {
  int N2 = 0, N3 = 0;
  std::vector<double> f0, f1;

  BoundaryData() = default;
  BoundaryData(int n2, int n3) : N2(n2), N3(n3), f0(size_t(n2) * n3, 0.0), f1(size_t(n2) * n3, 0.0) {}
  static BoundaryData sample(int n2, int n3, const std::function<double(double, double)>& g0,
                             const std::function<double(double, double)>& g1);
  size_t size() const { return f0.size(); }
};

// Field serialization: raw little-endian doubles in (i,j,k) row-major order with a JSON sidecar.
void write_field_binary(const ScalarField3& f, const std::string& path_without_ext);
ScalarField3 read_field_binary(const std::string& path_without_ext);
void write_field_csv(const ScalarField3& f, const std::string& path);

// Discrete operator  u ↦ −Σ_i ∂_i(κ_i ∂_i u) + w u  in divergence form, seven-point stencil with
// face-averaged coefficients, periodic in x², x³, Dirichlet at i ∈ {0, N1}.
class DivergenceSystem {
 public:
  DivergenceSystem(const Grid3& g, std::array<std::vector<double>, 3> kappa, std::vector<double> weight = {});

  const Grid3& grid() const { return grid_; }
  const Eigen::SparseMatrix<double>& matrix() const { return K_; }
  size_t unknowns() const { return static_cast<size_t>(grid_.N1 - 1) * grid_.N2 * grid_.N3; }

  // Operator applied at interior nodes of a full field; boundary entries of the result are zero.
  std::vector<double> apply(const std::vector<double>& u) const;

  struct Solution {
    ScalarField3 u;
    double residual = 0.0;  // discrete L² norm of the interior residual
    int iterations = 0;
  };
  Solution solve(const BoundaryData& f, double tol = 1e-10, int max_iter = 100000) const;

  double symmetry_defect() const;  // max |K_ab − K_ba| / max |K|

 private:
  double face(int axis, size_t n, size_t m) const { return 0.5 * (kappa_[axis][n] + kappa_[axis][m]); }
  Grid3 grid_;
  std::array<std::vector<double>, 3> kappa_;
  std::vector<double> weight_;
  Eigen::SparseMatrix<double> K_;
};

// Conformal factor stored on a grid: trilinear interpolation with a periodic wrap.
class GridConformal final : public ConformalField {
 public:
  explicit GridConformal(ScalarField3 c);
  double value(const Point3& x) const override;
  Point3 dlog(const Point3& x) const override;
  const ScalarField3& field() const { return c_; }

 private:
  double interp(const std::vector<double>& v, const Point3& x) const;
  ScalarField3 c_;
  std::array<std::vector<double>, 3> grad_;
};

}  // namespace stackel
