#include "stackel/oracle.hpp"

#include <cmath>
#include <fstream>

#include "stackel/errors.hpp"

namespace stackel {

SampledMetric sample_metric(const Model& model, const Grid3& g) {
  g.check();
  SampledMetric m;
  m.grid = g;
  for (auto& v : m.H) v.resize(g.size());
  m.sqrt_det.resize(g.size());
  for (int i = 0; i <= g.N1; ++i)
    for (int j = 0; j < g.N2; ++j)
      for (int k = 0; k < g.N3; ++k) {
        const size_t n = g.index(i, j, k);
        const MetricEval e = metric_eval(model, g.coord(i, j, k));
        double det = 1.0;
        for (int a = 0; a < 3; ++a) {
          m.H[a][n] = std::sqrt(e.H_sq[a]);
          det *= m.H[a][n];
        }
        m.sqrt_det[n] = det;
      }
  return m;
}

namespace {
std::array<std::vector<double>, 3> coefficients(const SampledMetric& m) {
  std::array<std::vector<double>, 3> kappa;
  for (int a = 0; a < 3; ++a) {
    kappa[a].resize(m.sqrt_det.size());
    for (size_t n = 0; n < m.sqrt_det.size(); ++n) kappa[a][n] = m.sqrt_det[n] / (m.H[a][n] * m.H[a][n]);
  }
  return kappa;
}
}  // namespace

DiscreteLaplaceSystem::DiscreteLaplaceSystem(SampledMetric m) : metric_(std::move(m)), sys_(metric_.grid, coefficients(metric_)) {}

double DiscreteLaplaceSystem::constant_defect() const {
  const std::vector<double> ones(metric_.grid.size(), 1.0);
  const auto r = sys_.apply(ones);
  double worst = 0.0, diag = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  const auto& K = sys_.matrix();
  for (int c = 0; c < K.outerSize(); ++c) diag = std::max(diag, std::abs(K.coeff(c, c)));
  return worst / diag;
}

ScalarField3 solve_laplace(const DiscreteLaplaceSystem& sys, const BoundaryData& f, double tol) { return sys.solve(f, tol).u; }

BoundaryData dn_oracle(const SampledMetric& m, const ScalarField3& u) {
  const Grid3& g = m.grid;
  BoundaryData out(g.N2, g.N3);
  const double h = g.h1();
  const int N = g.N1;
  for (int j = 0; j < g.N2; ++j)
    for (int k = 0; k < g.N3; ++k) {
      const size_t b = static_cast<size_t>(j) * g.N3 + k;
      const double d0 = (-3.0 * u.at(0, j, k) + 4.0 * u.at(1, j, k) - u.at(2, j, k)) / (2.0 * h);
      const double d1 = (3.0 * u.at(N, j, k) - 4.0 * u.at(N - 1, j, k) + u.at(N - 2, j, k)) / (2.0 * h);
      out.f0[b] = -d0 / m.H[0][g.index(0, j, k)];
      out.f1[b] = d1 / m.H[0][g.index(N, j, k)];
    }
  return out;
}

BoundaryData dn_oracle(const DiscreteLaplaceSystem& sys, const BoundaryData& f, double tol) {
  return dn_oracle(sys.metric(), solve_laplace(sys, f, tol));
}

double relative_l2(const BoundaryData& a, const BoundaryData& ref) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < ref.f0.size(); ++i) {
    num += std::pow(a.f0[i] - ref.f0[i], 2) + std::pow(a.f1[i] - ref.f1[i], 2);
    den += ref.f0[i] * ref.f0[i] + ref.f1[i] * ref.f1[i];
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

double fitted_order(const std::vector<int>& grids, const std::vector<double>& errs) {
  const size_t n = grids.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (size_t k = 0; k < n; ++k) {
    mx += std::log(grids[k]);
    my += std::log(std::max(errs[k], 1e-300));
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (size_t k = 0; k < n; ++k) {
    const double dx = std::log(grids[k]) - mx;
    sxy += dx * (std::log(std::max(errs[k], 1e-300)) - my);
    sxx += dx * dx;
  }
  return -sxy / sxx;
}

ConvergenceReport compare_dn(const Model& model, const AngularOperators& ops, const std::vector<JointEigenpair>& spectrum,
                             const std::vector<int>& grids, int data, int harmonics, unsigned seed, int max_modes) {
  ConvergenceReport r;
  std::vector<std::vector<double>> errs(data, std::vector<double>(grids.size()));
  std::vector<double> rms(grids.size(), 0.0);
  for (size_t gi = 0; gi < grids.size(); ++gi) {
    const int N = grids[gi];
    const Grid3 g = Grid3::cube(N, model.S.A);
    const DnOperator op = assemble_dn(model, ops, spectrum, max_modes, N, N);
    const DiscreteLaplaceSystem sys(sample_metric(model, g));
    for (int d = 0; d < data; ++d) {
      const BoundaryData f = harmonic_datum(op, harmonics, seed + d);
      const DnApplication sep = apply_dn(op, f);
      r.max_projection_residual = std::max(r.max_projection_residual, sep.projection_residual);
      const BoundaryData ref = dn_oracle(sys, f);
      const double e = relative_l2(sep.out, ref);
      errs[d][gi] = e;
      rms[gi] += e * e / data;
      r.rows.push_back({N, d, e});
    }
    rms[gi] = std::sqrt(rms[gi]);
  }
  r.min_order = 1e300;
  r.max_order = -1e300;
  for (int d = 0; d < data; ++d) {
    const double o = fitted_order(grids, errs[d]);
    r.datum_order.push_back(o);
    r.min_order = std::min(r.min_order, o);
    r.max_order = std::max(r.max_order, o);
  }
  r.order = fitted_order(grids, rms);
  return r;
}

void write_convergence_csv(const std::string& path, const ConvergenceReport& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  out.precision(17);
  out << "grid,datum_id,rel_err,fitted_order\n";
  for (const auto& row : r.rows)
    out << row.grid << ',' << row.datum << ',' << row.rel_err << ',' << r.datum_order[row.datum] << '\n';
}

}  // namespace stackel
