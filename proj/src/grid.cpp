#include "stackel/grid.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "stackel/errors.hpp"

namespace stackel {

void Grid3::check() const {
  if (N1 < 8 || N2 < 8 || N3 < 8) throw Error(ErrorCode::ConfigError, "grid sizes must be at least 8");
  if (!(A > 0.0)) throw Error(ErrorCode::ConfigError, "grid length must be positive");
}

double ScalarField3::min() const { return *std::min_element(v.begin(), v.end()); }
double ScalarField3::max() const { return *std::max_element(v.begin(), v.end()); }

BoundaryData BoundaryData::sample(int n2, int n3, const std::function<double(double, double)>& g0,
                                  const std::function<double(double, double)>& g1) {
  BoundaryData b(n2, n3);
  for (int j = 0; j < n2; ++j)
    for (int k = 0; k < n3; ++k) {
      const double x2 = kTwoPi * j / n2, x3 = kTwoPi * k / n3;
      b.f0[size_t(j) * n3 + k] = g0(x2, x3);
      b.f1[size_t(j) * n3 + k] = g1(x2, x3);
    }
  return b;
}

void write_field_binary(const ScalarField3& f, const std::string& base) {
  std::ofstream out(base + ".bin", std::ios::binary);
  out.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  nlohmann::json meta = {{"shape", {f.grid.N1 + 1, f.grid.N2, f.grid.N3}},
                         {"spacing", {f.grid.h1(), f.grid.h2(), f.grid.h3()}},
                         {"A", f.grid.A},
                         {"order", "row-major (i,j,k)"},
                         {"dtype", "float64"},
                         {"boundary_rows", {0, f.grid.N1}}};
  std::ofstream(base + ".json") << meta.dump(2) << "\n";
}

ScalarField3 read_field_binary(const std::string& base) {
  std::ifstream mf(base + ".json");
  if (!mf) throw Error(ErrorCode::ConfigError, base + ".json: cannot open");
  nlohmann::json meta = nlohmann::json::parse(mf);
  Grid3 g{meta["shape"][0].get<int>() - 1, meta["shape"][1].get<int>(), meta["shape"][2].get<int>(), meta["A"].get<double>()};
  ScalarField3 f(g);
  std::ifstream in(base + ".bin", std::ios::binary);
  in.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::ConfigError, base + ".bin: short read");
  return f;
}

void write_field_csv(const ScalarField3& f, const std::string& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "i,j,k,value\n";
  for (int i = 0; i <= f.grid.N1; ++i)
    for (int j = 0; j < f.grid.N2; ++j)
      for (int k = 0; k < f.grid.N3; ++k) out << i << ',' << j << ',' << k << ',' << f.at(i, j, k) << '\n';
}

DivergenceSystem::DivergenceSystem(const Grid3& g, std::array<std::vector<double>, 3> kappa, std::vector<double> weight)
    : grid_(g), kappa_(std::move(kappa)), weight_(std::move(weight)) {
  grid_.check();
  const int N1 = g.N1, N2 = g.N2, N3 = g.N3;
  const double ih[3] = {1.0 / (g.h1() * g.h1()), 1.0 / (g.h2() * g.h2()), 1.0 / (g.h3() * g.h3())};
  auto unk = [&](int i, int j, int k) { return (static_cast<size_t>(i - 1) * N2 + j) * N3 + k; };
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(unknowns() * 7);
  for (int i = 1; i < N1; ++i)
    for (int j = 0; j < N2; ++j)
      for (int k = 0; k < N3; ++k) {
        const size_t n = g.index(i, j, k);
        const size_t r = unk(i, j, k);
        double diag = weight_.empty() ? 0.0 : weight_[n];
        const int nb[6][4] = {{0, i - 1, j, k}, {0, i + 1, j, k}, {1, i, (j + N2 - 1) % N2, k},
                              {1, i, (j + 1) % N2, k}, {2, i, j, (k + N3 - 1) % N3}, {2, i, j, (k + 1) % N3}};
        for (const auto& e : nb) {
          const size_t m = g.index(e[1], e[2], e[3]);
          const double a = face(e[0], n, m) * ih[e[0]];
          diag += a;
          if (e[1] >= 1 && e[1] <= N1 - 1) trip.emplace_back(static_cast<int>(r), static_cast<int>(unk(e[1], e[2], e[3])), -a);
        }
        trip.emplace_back(static_cast<int>(r), static_cast<int>(r), diag);
      }
  K_.resize(static_cast<int>(unknowns()), static_cast<int>(unknowns()));
  K_.setFromTriplets(trip.begin(), trip.end());
  K_.makeCompressed();
}

std::vector<double> DivergenceSystem::apply(const std::vector<double>& u) const {
  const Grid3& g = grid_;
  const int N1 = g.N1, N2 = g.N2, N3 = g.N3;
  const double ih[3] = {1.0 / (g.h1() * g.h1()), 1.0 / (g.h2() * g.h2()), 1.0 / (g.h3() * g.h3())};
  std::vector<double> out(g.size(), 0.0);
  for (int i = 1; i < N1; ++i)
    for (int j = 0; j < N2; ++j)
      for (int k = 0; k < N3; ++k) {
        const size_t n = g.index(i, j, k);
        double acc = weight_.empty() ? 0.0 : weight_[n] * u[n];
        const int nb[6][4] = {{0, i - 1, j, k}, {0, i + 1, j, k}, {1, i, (j + N2 - 1) % N2, k},
                              {1, i, (j + 1) % N2, k}, {2, i, j, (k + N3 - 1) % N3}, {2, i, j, (k + 1) % N3}};
        for (const auto& e : nb) {
          const size_t m = g.index(e[1], e[2], e[3]);
          acc += face(e[0], n, m) * ih[e[0]] * (u[n] - u[m]);
        }
        out[n] = acc;
      }
  return out;
}

DivergenceSystem::Solution DivergenceSystem::solve(const BoundaryData& f, double tol, int max_iter) const {
  const Grid3& g = grid_;
  if (f.N2 != g.N2 || f.N3 != g.N3) throw Error(ErrorCode::ConfigError, "boundary data does not match the grid");
  const int N1 = g.N1, N2 = g.N2, N3 = g.N3;
  Solution sol{ScalarField3(g), 0.0, 0};
  // linear interpolation of the boundary data as initial guess
  for (int i = 0; i <= N1; ++i) {
    const double t = static_cast<double>(i) / N1;
    for (int j = 0; j < N2; ++j)
      for (int k = 0; k < N3; ++k) {
        const size_t b = size_t(j) * N3 + k;
        sol.u.at(i, j, k) = f.f0[b] + t * (f.f1[b] - f.f0[b]);  // exact when both ends agree
      }
  }
  // right-hand side: coupling to the Dirichlet rows
  std::vector<double> ub(g.size(), 0.0);
  for (int j = 0; j < N2; ++j)
    for (int k = 0; k < N3; ++k) {
      ub[g.index(0, j, k)] = f.f0[size_t(j) * N3 + k];
      ub[g.index(N1, j, k)] = f.f1[size_t(j) * N3 + k];
    }
  const std::vector<double> Kub = apply(ub);
  const size_t nu = unknowns();
  Eigen::VectorXd rhs(nu), x0(nu);
  for (int i = 1; i < N1; ++i)
    for (int j = 0; j < N2; ++j)
      for (int k = 0; k < N3; ++k) {
        const size_t r = (static_cast<size_t>(i - 1) * N2 + j) * N3 + k;
        rhs[r] = -Kub[g.index(i, j, k)];
        x0[r] = sol.u.at(i, j, k);
      }
  const double bnorm = rhs.norm();
  Eigen::VectorXd x = x0;
  if (bnorm > 0.0 && (K_ * x0 - rhs).norm() > tol * 1e-2 * bnorm) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setMaxIterations(max_iter);
    cg.setTolerance(tol * 1e-2);
    cg.compute(K_);
    x = cg.solveWithGuess(rhs, x0);
    sol.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success) {
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> bi;
      bi.setMaxIterations(max_iter);
      bi.setTolerance(tol * 1e-2);
      bi.compute(K_);
      x = bi.solveWithGuess(rhs, x);
      sol.iterations += static_cast<int>(bi.iterations());
      if (bi.info() != Eigen::Success) throw Error(ErrorCode::SolverDiverged, "iterative solve did not reach tolerance");
    }
  } else if (bnorm == 0.0) {
    x.setZero();
  }
  for (int i = 1; i < N1; ++i)
    for (int j = 0; j < N2; ++j)
      for (int k = 0; k < N3; ++k) sol.u.at(i, j, k) = x[(static_cast<size_t>(i - 1) * N2 + j) * N3 + k];
  const std::vector<double> res = apply(sol.u.v);
  double s = 0.0;
  for (double r : res) s += r * r;
  sol.residual = std::sqrt(s / static_cast<double>(nu)) / (1.0 + std::sqrt(bnorm * bnorm / static_cast<double>(nu)));
  if (!(sol.residual <= tol)) throw Error(ErrorCode::SolverDiverged, "residual " + std::to_string(sol.residual) + " above tolerance");
  return sol;
}

double DivergenceSystem::symmetry_defect() const {
  Eigen::SparseMatrix<double> T = K_.transpose();
  Eigen::SparseMatrix<double> D = K_ - T;
  double dmax = 0.0, kmax = 0.0;
  for (int c = 0; c < D.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, c); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (int c = 0; c < K_.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K_, c); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
  return kmax > 0 ? dmax / kmax : 0.0;
}

GridConformal::GridConformal(ScalarField3 c) : c_(std::move(c)) {
  const Grid3& g = c_.grid;
  for (auto& gr : grad_) gr.assign(g.size(), 0.0);
  for (int i = 0; i <= g.N1; ++i)
    for (int j = 0; j < g.N2; ++j)
      for (int k = 0; k < g.N3; ++k) {
        const size_t n = g.index(i, j, k);
        double d1;
        if (i == 0) d1 = (-3 * c_.at(0, j, k) + 4 * c_.at(1, j, k) - c_.at(2, j, k)) / (2 * g.h1());
        else if (i == g.N1) d1 = (3 * c_.at(i, j, k) - 4 * c_.at(i - 1, j, k) + c_.at(i - 2, j, k)) / (2 * g.h1());
        else d1 = (c_.at(i + 1, j, k) - c_.at(i - 1, j, k)) / (2 * g.h1());
        const double d2 = (c_.at(i, (j + 1) % g.N2, k) - c_.at(i, (j + g.N2 - 1) % g.N2, k)) / (2 * g.h2());
        const double d3 = (c_.at(i, j, (k + 1) % g.N3) - c_.at(i, j, (k + g.N3 - 1) % g.N3)) / (2 * g.h3());
        grad_[0][n] = d1;
        grad_[1][n] = d2;
        grad_[2][n] = d3;
      }
}

double GridConformal::interp(const std::vector<double>& v, const Point3& x) const {
  const Grid3& g = c_.grid;
  double t1 = std::clamp(x[0] / g.h1(), 0.0, static_cast<double>(g.N1));
  int i0 = std::min(static_cast<int>(std::floor(t1)), g.N1 - 1);
  const double a = t1 - i0;
  auto wrap = [](double t, int n) {
    double r = std::fmod(t, static_cast<double>(n));
    return r < 0 ? r + n : r;
  };
  const double t2 = wrap(x[1] / g.h2(), g.N2), t3 = wrap(x[2] / g.h3(), g.N3);
  const int j0 = std::min(static_cast<int>(t2), g.N2 - 1), k0 = std::min(static_cast<int>(t3), g.N3 - 1);
  const double b = t2 - j0, c = t3 - k0;
  const int j1 = (j0 + 1) % g.N2, k1 = (k0 + 1) % g.N3;
  double acc = 0.0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        const double w = (di ? a : 1 - a) * (dj ? b : 1 - b) * (dk ? c : 1 - c);
        if (w != 0.0) acc += w * v[g.index(i0 + di, dj ? j1 : j0, dk ? k1 : k0)];
      }
  return acc;
}

double GridConformal::value(const Point3& x) const { return interp(c_.v, x); }

Point3 GridConformal::dlog(const Point3& x) const {
  const double c = value(x);
  return {interp(grad_[0], x) / c, interp(grad_[1], x) / c, interp(grad_[2], x) / c};
}

}  // namespace stackel
