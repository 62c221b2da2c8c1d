#include "stackel/dn.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

#include "stackel/errors.hpp"

namespace stackel {

BlockEigen block_eigen(const Eigen::Matrix2d& b) {
  Eigen::Matrix2d sym;
  sym << b(0, 0), b(0, 1), -b(1, 0), -b(1, 1);
  sym(1, 0) = sym(0, 1) = 0.5 * (sym(0, 1) + sym(1, 0));
  const double m = sym(0, 0), n = sym(1, 1), d = sym(0, 1);
  const double mean = 0.5 * (m + n), rad = std::hypot(0.5 * (m - n), d);
  BlockEigen e;
  e.omega_plus = mean + rad;
  e.omega_minus = mean - rad;
  // eigenvector of the larger eigenvalue via the half-angle, stable for d → 0
  const double theta = 0.5 * std::atan2(2.0 * d, m - n);
  e.x_plus = Eigen::Vector2d(std::cos(theta), std::sin(theta));
  e.x_minus = Eigen::Vector2d(-std::sin(theta), std::cos(theta));
  e.residual = std::max((sym * e.x_plus - e.omega_plus * e.x_plus).norm(), (sym * e.x_minus - e.omega_minus * e.x_minus).norm()) /
               std::max(1.0, sym.norm());
  return e;
}

DnOperator assemble_dn(const Model& model, const AngularOperators& ops, const std::vector<JointEigenpair>& spectrum,
                       int max_modes, int N2, int N3) {
  DnOperator op;
  op.N2 = N2;
  op.N3 = N3;
  op.A = model.S.A;
  const size_t n = static_cast<size_t>(N2) * N3;
  const double h2 = kTwoPi / N2, h3 = kTwoPi / N3;
  op.quad_weight.resize(n);
  for (auto* v : {&op.H1_0, &op.H1_A, &op.Gamma1_0, &op.Gamma1_A, &op.R_0, &op.R_A}) v->resize(n);
  for (int j = 0; j < N2; ++j)
    for (int k = 0; k < N3; ++k) {
      const size_t i = j * N3 + k;
      op.quad_weight(i) = ops.weight(j * h2, k * h3) * h2 * h3;
      const MetricEval e0 = metric_eval(model, {0.0, j * h2, k * h3});
      const MetricEval e1 = metric_eval(model, {op.A, j * h2, k * h3});
      op.H1_0[i] = std::sqrt(e0.H_sq[0]);
      op.H1_A[i] = std::sqrt(e1.H_sq[0]);
      op.Gamma1_0[i] = e0.Gamma[0];
      op.Gamma1_A[i] = e1.Gamma[0];
      op.R_0[i] = e0.r_factor;
      op.R_A[i] = e1.r_factor;
    }
  const RadialRow row = RadialRow::of(model);
  for (const auto& p : spectrum) {
    auto modes = joint_modes(ops, p, N2, N3);
    if (modes.empty()) continue;
    if (op.truncation + static_cast<int>(modes.size()) > max_modes) break;
    const WTData w = wt(row, {p.mu2, p.nu2});
    if (w.is_pole) {
      op.withheld.emplace_back(p.mu2, p.nu2);
      continue;
    }
    DnBlock b;
    b.mu2 = p.mu2;
    b.nu2 = p.nu2;
    b.multiplicity = static_cast<int>(modes.size());
    b.block = bvp_derivative_map(w).real();
    const BlockEigen e = block_eigen(b.block);
    b.omega_plus = e.omega_plus;
    b.omega_minus = e.omega_minus;
    b.x_plus = e.x_plus;
    b.x_minus = e.x_minus;
    b.modes = std::move(modes);
    op.truncation += b.multiplicity;
    op.blocks.push_back(std::move(b));
  }
  return op;
}

DnApplication apply_dn(const DnOperator& op, const BoundaryData& f) {
  const size_t n = static_cast<size_t>(op.N2) * op.N3;
  if (f.N2 != op.N2 || f.N3 != op.N3) throw Error(ErrorCode::ConfigError, "boundary data grid does not match the DN operator");
  Eigen::VectorXd p0(n), p1(n);
  for (size_t i = 0; i < n; ++i) {
    p0(i) = f.f0[i] / op.R_0[i];
    p1(i) = f.f1[i] / op.R_A[i];
  }
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(n), q1 = q0, d0 = q0, d1 = q0;
  for (const auto& b : op.blocks)
    for (const auto& Y : b.modes) {
      const Eigen::VectorXd wY = op.quad_weight.cwiseProduct(Y);
      const double c0 = wY.dot(p0), c1 = wY.dot(p1);
      q0 += c0 * Y;
      q1 += c1 * Y;
      d0 += (b.block(0, 0) * c0 + b.block(0, 1) * c1) * Y;
      d1 += (b.block(1, 0) * c0 + b.block(1, 1) * c1) * Y;
    }
  auto wnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(op.quad_weight.cwiseProduct(v))); };
  DnApplication r;
  const double n0 = wnorm(p0), n1 = wnorm(p1);
  r.projection_residual = std::max(n0 > 0 ? wnorm(p0 - q0) / n0 : 0.0, n1 > 0 ? wnorm(p1 - q1) / n1 : 0.0);
  r.truncation_warning = r.projection_residual > 1e-3;
  r.out = BoundaryData(op.N2, op.N3);
  for (size_t i = 0; i < n; ++i) {
    r.out.f0[i] = -op.R_0[i] / op.H1_0[i] * (0.5 * op.Gamma1_0[i] * q0(i) + d0(i));
    r.out.f1[i] = op.R_A[i] / op.H1_A[i] * (0.5 * op.Gamma1_A[i] * q1(i) + d1(i));
  }
  return r;
}

BoundaryData harmonic_datum(const DnOperator& op, int harmonics, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const size_t n = static_cast<size_t>(op.N2) * op.N3;
  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(n), g1 = g0;
  int used = 0;
  for (const auto& b : op.blocks)
    for (const auto& Y : b.modes) {
      if (used++ >= harmonics) break;
      g0 += U(gen) * Y;
      g1 += U(gen) * Y;
    }
  BoundaryData f(op.N2, op.N3);
  for (size_t i = 0; i < n; ++i) {
    f.f0[i] = op.R_0[i] * g0(i);
    f.f1[i] = op.R_A[i] * g1(i);
  }
  return f;
}

void export_dn(const DnOperator& op, const std::string& fixture_hash, const std::string& path) {
  nlohmann::json h;
  h["truncation"] = op.truncation;
  h["blocks"] = op.blocks.size();
  h["fixture_hash"] = fixture_hash;
  h["grid"] = {op.N2, op.N3};
  h["A"] = op.A;
  h["withheld"] = op.withheld;
  std::ofstream hj(path + ".json");
  if (!hj) throw Error(ErrorCode::ConfigError, "cannot write " + path + ".json");
  hj << h.dump(2) << '\n';
  std::ofstream out(path + ".csv");
  out.precision(17);
  out << "m,mu2,nu2,b00,b01,b10,b11,omega_plus,omega_minus\n";
  for (size_t m = 0; m < op.blocks.size(); ++m) {
    const auto& b = op.blocks[m];
    out << m << ',' << b.mu2 << ',' << b.nu2 << ',' << b.block(0, 0) << ',' << b.block(0, 1) << ',' << b.block(1, 0) << ','
        << b.block(1, 1) << ',' << b.omega_plus << ',' << b.omega_minus << '\n';
  }
}

}  // namespace stackel
