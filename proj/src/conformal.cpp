#include "stackel/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "stackel/errors.hpp"

namespace stackel {

ZerothOrderField zeroth_order_coefficient(const StackelMatrix& S, const Potentials& phi, const Grid3& grid) {
  ZerothOrderField out{ScalarField3(grid), false, 0.0, 0.0};
  const ConstantConformal one(1.0);
  for (int i = 0; i <= grid.N1; ++i)
    for (int j = 0; j < grid.N2; ++j)
      for (int k = 0; k < grid.N3; ++k) out.field.at(i, j, k) = metric_eval(S, one, phi, grid.coord(i, j, k)).zeroth_order;
  out.min = out.field.min();
  out.max = out.field.max();
  out.nonnegative = out.min >= -1e-12;
  return out;
}

ConformalSolution solve_conformal(const StackelMatrix& S, const Potentials& phi, const BoundaryData& eta, const Grid3& grid,
                                  double tol) {
  for (double v : eta.f0)
    if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, "boundary data for the conformal factor must be positive");
  for (double v : eta.f1)
    if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, "boundary data for the conformal factor must be positive");
  const ConstantConformal one(1.0);
  std::array<std::vector<double>, 3> kappa;
  for (auto& k : kappa) k.assign(grid.size(), 0.0);
  std::vector<double> w(grid.size(), 0.0);
  double zmin = 1e300, zmax = -1e300;
  for (int i = 0; i <= grid.N1; ++i)
    for (int j = 0; j < grid.N2; ++j)
      for (int k = 0; k < grid.N3; ++k) {
        const MetricEval m = metric_eval(S, one, phi, grid.coord(i, j, k));
        const double sqrtg = std::sqrt(m.h_sq[0] * m.h_sq[1] * m.h_sq[2]);
        const size_t n = grid.index(i, j, k);
        for (int a = 0; a < 3; ++a) kappa[a][n] = sqrtg / m.h_sq[a];
        w[n] = sqrtg * m.zeroth_order;
        zmin = std::min(zmin, m.zeroth_order);
        zmax = std::max(zmax, m.zeroth_order);
      }
  DivergenceSystem sys(grid, std::move(kappa), std::move(w));
  auto sol = sys.solve(eta, tol);
  ConformalSolution out;
  out.c = std::move(sol.u);
  out.residual = sol.residual;
  out.iterations = sol.iterations;
  if (out.c.min() <= 0.0) throw Error(ErrorCode::NonPositiveSolution, "conformal factor not positive");
  const double emin = std::min(*std::min_element(eta.f0.begin(), eta.f0.end()), *std::min_element(eta.f1.begin(), eta.f1.end()));
  const double emax = std::max(*std::max_element(eta.f0.begin(), eta.f0.end()), *std::max_element(eta.f1.begin(), eta.f1.end()));
  out.coefficient_nonnegative = zmin >= -1e-12;
  out.coefficient_nonpositive = zmax <= 1e-12;
  // Z ≥ 0: c cannot exceed max η.  Z ≤ 0: c cannot drop below min η.
  if (out.coefficient_nonnegative) {
    out.upper_bound_checked = true;
    if (out.c.max() > emax + 1e-9) throw Error(ErrorCode::SolverDiverged, "maximum principle upper bound violated");
  }
  if (out.coefficient_nonpositive) {
    out.lower_bound_checked = true;
    if (out.c.min() < emin - 1e-9) throw Error(ErrorCode::SolverDiverged, "maximum principle lower bound violated");
  }
  return out;
}

namespace {

// −Δ_{g0} f / f at interior nodes, g0 = diag(1/s^{11}, 1/s^{21}, 1/s^{31}).
ScalarField3 quotient(const Grid3& g, const std::array<std::vector<double>, 3>& kappa, const std::vector<double>& sqrtg0,
                      const std::vector<double>& f) {
  ScalarField3 q(g);
  const double ih[3] = {1.0 / (g.h1() * g.h1()), 1.0 / (g.h2() * g.h2()), 1.0 / (g.h3() * g.h3())};
  for (int i = 1; i < g.N1; ++i)
    for (int j = 0; j < g.N2; ++j)
      for (int k = 0; k < g.N3; ++k) {
        const size_t n = g.index(i, j, k);
        const int nb[6][4] = {{0, i - 1, j, k}, {0, i + 1, j, k}, {1, i, (j + g.N2 - 1) % g.N2, k},
                              {1, i, (j + 1) % g.N2, k}, {2, i, j, (k + g.N3 - 1) % g.N3}, {2, i, j, (k + 1) % g.N3}};
        double acc = 0.0;
        for (const auto& e : nb) {
          const size_t m = g.index(e[1], e[2], e[3]);
          acc += 0.5 * (kappa[e[0]][n] + kappa[e[0]][m]) * ih[e[0]] * (f[n] - f[m]);
        }
        q.v[n] = acc / sqrtg0[n] / f[n];
      }
  return q;
}

}  // namespace

AlphaReport alpha_pde_check(const StackelMatrix& S, const ScalarField3& c1, const ScalarField3& c2) {
  const Grid3& g = c1.grid;
  if (c2.grid.N1 != g.N1 || c2.grid.N2 != g.N2 || c2.grid.N3 != g.N3)
    throw Error(ErrorCode::ConfigError, "conformal solutions live on different grids");
  AlphaReport rep;
  rep.alpha = ScalarField3(g);
  for (auto& f : rep.g0_inverse) f = ScalarField3(g);
  ScalarField3 alpha2(g);
  std::array<std::vector<double>, 3> kappa;
  for (auto& k : kappa) k.assign(g.size(), 0.0);
  std::vector<double> sqrtg0(g.size()), beta1(g.size()), beta2(g.size());
  for (int i = 0; i <= g.N1; ++i)
    for (int j = 0; j < g.N2; ++j)
      for (int k = 0; k < g.N3; ++k) {
        const StackelJets sj = stackel_jets(S, g.coord(i, j, k));
        const size_t n = g.index(i, j, k);
        const double prod = sj.cof[0] * sj.cof[1] * sj.cof[2];
        sqrtg0[n] = 1.0 / std::sqrt(prod);
        for (int a = 0; a < 3; ++a) {
          rep.g0_inverse[a].v[n] = 1.0 / sj.cof[a];
          kappa[a][n] = sqrtg0[n] * sj.cof[a];
        }
        const double q1 = std::pow(sj.det, 0.25);
        beta1[n] = c1.v[n] * q1;
        beta2[n] = c2.v[n] * q1;
        rep.alpha.v[n] = std::pow(beta1[n], 4);
        alpha2.v[n] = std::pow(beta2[n], 4);
        if (std::abs(rep.alpha.v[n]) < 1e-12 || std::abs(alpha2.v[n]) < 1e-12)
          throw Error(ErrorCode::DivisionNearZero, "alpha vanishes at a node");
      }
  rep.Q1 = quotient(g, kappa, sqrtg0, beta1);
  rep.Q2 = quotient(g, kappa, sqrtg0, beta2);
  const ScalarField3 L1 = quotient(g, kappa, sqrtg0, rep.alpha.v), L2 = quotient(g, kappa, sqrtg0, alpha2.v);
  for (int i = 1; i < g.N1; ++i)
    for (int j = 0; j < g.N2; ++j)
      for (int k = 0; k < g.N3; ++k) {
        const size_t n = g.index(i, j, k);
        rep.max_diff = std::max(rep.max_diff, std::abs(rep.Q1.v[n] - rep.Q2.v[n]));
        rep.max_Q1 = std::max(rep.max_Q1, std::abs(rep.Q1.v[n]));
        rep.literal_max_diff = std::max(rep.literal_max_diff, std::abs(L1.v[n] - L2.v[n]));
      }
  rep.relative = rep.max_diff / (1.0 + rep.max_Q1);
  return rep;
}

Model build_model(const Fixture& fx, int n) {
  Model m;
  m.S = fx.S;
  m.phi = fx.phi;
  if (fx.phi_compatible) return m;
  const Grid3 probe = Grid3::cube(8, fx.S.A);
  const ZerothOrderField z = zeroth_order_coefficient(fx.S, fx.phi, probe);
  if (std::max(std::abs(z.min), std::abs(z.max)) <= 1e-10) return m;
  const Grid3 g = Grid3::cube(n, fx.S.A);
  BoundaryData eta(g.N2, g.N3);
  std::fill(eta.f0.begin(), eta.f0.end(), 1.0);
  std::fill(eta.f1.begin(), eta.f1.end(), 1.0);
  ConformalSolution cs = solve_conformal(fx.S, fx.phi, eta, g);
  m.c = std::make_shared<GridConformal>(std::move(cs.c));
  return m;
}

}  // namespace stackel
