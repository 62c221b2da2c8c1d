#include "stackel/angular.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>

#include "stackel/errors.hpp"

namespace stackel {

namespace {

constexpr int kCoarse = 512;
constexpr double kPeriod = kTwoPi;

int next_pow2(double need) {
  int n = 1;
  while (n < need) {
    if (n > (1 << 24)) throw Error(ErrorCode::IntegratorFailure, "angular step budget exceeded");
    n <<= 1;
  }
  return n;
}

}  // namespace

struct HillRow::Cache {
  std::mutex mu;
  std::map<int, std::shared_ptr<const Table>> tables;
};

HillRow::HillRow(UnivariateFn a, UnivariateFn b, UnivariateFn phi)
    : a_(std::move(a)), b_(std::move(b)), phi_(std::move(phi)), cache_(std::make_shared<Cache>()) {
  const UnivariateFn* fs[3] = {&a_, &b_, &phi_};
  for (int q = 0; q < 3; ++q) {
    coarse_[q].resize(kCoarse);
    double m = 0.0;
    for (int k = 0; k < kCoarse; ++k) {
      coarse_[q][k] = (*fs[q])(kPeriod * k / kCoarse);
      m = std::max(m, std::abs(coarse_[q][k]));
    }
    bound_[q] = m;
  }
}

std::shared_ptr<const HillRow::Table> HillRow::table(int steps) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto it = cache_->tables.find(steps);
  if (it != cache_->tables.end()) return it->second;
  auto t = std::make_shared<Table>();
  t->steps = steps;
  t->h = kPeriod / steps;
  const double g1 = 0.5 - std::sqrt(3.0) / 6.0, g2 = 0.5 + std::sqrt(3.0) / 6.0;
  t->a.resize(2 * steps);
  t->b.resize(2 * steps);
  t->p.resize(2 * steps);
  for (int n = 0; n < steps; ++n) {
    const double xs[2] = {(n + g1) * t->h, (n + g2) * t->h};
    for (int g = 0; g < 2; ++g) {
      t->a[2 * n + g] = a_(xs[g]);
      t->b[2 * n + g] = b_(xs[g]);
      t->p[2 * n + g] = phi_(xs[g]);
    }
  }
  cache_->tables[steps] = t;
  return t;
}

int HillRow::steps_for(double mu2, double nu2) const {
  const double k = std::sqrt(std::abs(mu2) * bound_[0] + std::abs(nu2) * bound_[1] + bound_[2]);
  return std::max(1024, next_pow2(kPeriod * (1.0 + k) / 0.25));
}

double Monodromy::trace() const {
  const double t = M.trace();
  if (log_scale > 690.0) return t > 0 ? 1e300 : (t < 0 ? -1e300 : 0.0);
  return t * std::exp(log_scale);
}

// Fourth-order Magnus integrator: exact for constant coefficients and unimodular at every step.
Monodromy hill_monodromy(const HillRow& row, double mu2, double nu2, bool trajectory) {
  if (!std::isfinite(mu2) || !std::isfinite(nu2)) throw Error(ErrorCode::IntegratorFailure, "non-finite spectral pair");
  const int N = row.steps_for(mu2, nu2);
  const auto t = row.table(N);
  const double h = t->h, c3 = std::sqrt(3.0) / 12.0 * h * h;
  Monodromy out;
  Eigen::Matrix2d Y = Eigen::Matrix2d::Identity();
  int zeros = 0, sign = 1;
  if (trajectory) {
    out.xs.reserve(N + 1);
    out.traj.reserve(N + 1);
    out.xs.push_back(0.0);
    out.traj.push_back(Y);
  }
  for (int n = 0; n < N; ++n) {
    const double q1 = mu2 * t->a[2 * n] + nu2 * t->b[2 * n] - t->p[2 * n];
    const double q2 = mu2 * t->a[2 * n + 1] + nu2 * t->b[2 * n + 1] - t->p[2 * n + 1];
    const double al = c3 * (q1 - q2), qb = 0.5 * (q1 + q2);
    // Ω = [[al, h], [h qb, −al]], exp(Ω) = C I + S Ω
    const double s2 = al * al + h * h * qb;
    double C, S;
    if (std::abs(s2) < 1e-8) {
      C = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
      S = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
    } else if (s2 > 0) {
      const double s = std::sqrt(s2);
      C = std::cosh(s);
      S = std::sinh(s) / s;
    } else {
      const double s = std::sqrt(-s2);
      C = std::cos(s);
      S = std::sin(s) / s;
    }
    Eigen::Matrix2d E;
    E << C + S * al, S * h, S * h * qb, C - S * al;
    Y = E * Y;
    const double ys = Y(0, 1);
    const int sg = ys > 0 ? 1 : (ys < 0 ? -1 : sign);
    if (sg != sign) {
      ++zeros;
      sign = sg;
    }
    const double mx = Y.cwiseAbs().maxCoeff();
    if (!std::isfinite(mx)) throw Error(ErrorCode::IntegratorFailure, "non-finite periodic solution");
    if (mx > 1e100) {
      Y /= mx;
      out.log_scale += std::log(mx);
    }
    if (trajectory) {
      out.xs.push_back((n + 1) * h);
      out.traj.push_back(Y * std::exp(out.log_scale));
    }
  }
  out.M = Y;
  const double par = (zeros % 2) ? -1.0 : 1.0;
  out.theta = zeros * M_PI + std::atan2(par * Y(0, 1), par * Y(1, 1));
  return out;
}

double PeriodicMode::operator()(double x) const {
  const int n = static_cast<int>(y.size()) - 1;
  x = std::fmod(x, kPeriod);
  if (x < 0) x += kPeriod;
  int i = std::min(n - 1, static_cast<int>(x / h));
  const double t = (x - i * h) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * dy[i] + (-2 * t3 + 3 * t2) * y[i + 1] +
         (t3 - t2) * h * dy[i + 1];
}

std::vector<double> PeriodicMode::sample(int n) const {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = (*this)(kPeriod * k / n);
  return out;
}

namespace {

bool normal_pattern(const StackelMatrix& S) {
  double c1 = -1e300, c2 = 1e300;
  for (int k = 0; k < 64; ++k) {
    const double x = kPeriod * k / 64;
    const double s22 = S.s[1][1](x), s23 = S.s[1][2](x), s32 = S.s[2][1](x), s33 = S.s[2][2](x);
    if (!(s22 < 0 && s23 > 0 && s32 > 0 && s33 < 0)) return false;
    c1 = std::max(c1, -s32 / s33);
    c2 = std::min(c2, -s22 / s23);
  }
  return c1 < c2;
}

UnivariateFn combine(const UnivariateFn& f, double p, const UnivariateFn& g, double q) {
  if (q == 0.0) return p == 1.0 ? f : p * f;
  if (p == 0.0) return q == 1.0 ? g : q * g;
  return p * f + q * g;
}

}  // namespace

AngularOperators AngularOperators::of(const StackelMatrix& S, const Potentials& phi) {
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
  if (!normal_pattern(S)) P = canonical_angular_gauge(S);
  // row vector (s_i2, s_i3)·P
  HillRow r2(combine(S.s[1][1], P(0, 0), S.s[1][2], P(1, 0)), combine(S.s[1][1], P(0, 1), S.s[1][2], P(1, 1)), phi[1]);
  HillRow r3(combine(S.s[2][1], P(0, 0), S.s[2][2], P(1, 0)), combine(S.s[2][1], P(0, 1), S.s[2][2], P(1, 1)), phi[2]);
  AngularOperators ops{std::move(r2), std::move(r3), P, Eigen::Vector2d::Zero(), S, phi};
  return ops;
}

AngularOperators AngularOperators::shifted(double B1, double B2) const {
  AngularOperators o = *this;
  o.shift += Eigen::Vector2d(B1, B2);
  return o;
}

double AngularOperators::weight(double x2, double x3) const {
  return S.s[1][1](x2) * S.s[2][2](x3) - S.s[1][2](x2) * S.s[2][1](x3);
}

std::pair<double, double> hill_discriminants(const AngularOperators& ops, double mu2, double nu2) {
  const Eigen::Vector2d w = ops.gauge.inverse() * (Eigen::Vector2d(mu2, nu2) - ops.shift);
  return {hill_monodromy(ops.row2, w(0), w(1)).trace(), hill_monodromy(ops.row3, w(0), w(1)).trace()};
}

namespace {

// A row viewed as the weighted Hill problem  (−∂² + f) y = λ w y  with the other parameter fixed.
struct Line {
  const HillRow* row;
  bool along_b;  // λ = −ν² (weight b) or λ = −µ² (weight a)
  double fixed;

  std::pair<double, double> pair(double lam) const { return along_b ? std::make_pair(fixed, -lam) : std::make_pair(-lam, fixed); }
  Monodromy mono(double lam, bool traj = false) const {
    auto [m, n] = pair(lam);
    return hill_monodromy(*row, m, n, traj);
  }
  // bounds of f/w and of w over the coarse samples
  void ranges(double& lo, double& hi, double& wmin) const {
    const auto& c = row->coarse(along_b ? 0 : 1);
    const auto& w = row->coarse(along_b ? 1 : 0);
    const auto& p = row->coarse(2);
    lo = 1e300;
    hi = -1e300;
    wmin = 1e300;
    for (size_t k = 0; k < c.size(); ++k) {
      if (!(w[k] > 0)) throw Error(ErrorCode::NonPositiveCoefficient, "angular weight not positive in the working gauge");
      const double r = (fixed * c[k] - p[k]) / w[k];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      wmin = std::min(wmin, w[k]);
    }
  }
};

struct Tol {
  bool operator()(double a, double b) const { return std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); }
};

template <class F>
double solve_bracketed(F f, double a, double b, double fa, double fb) {
  if (fa == 0) return a;
  if (fb == 0) return b;
  boost::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, Tol(), it);
  return 0.5 * (r.first + r.second);
}

// m-th Dirichlet eigenvalue (m ≥ 1) on [0, 2π], with lo below it.
double dirichlet(const Line& L, int m, double lo) {
  double flo, fhi, wmin;
  L.ranges(flo, fhi, wmin);
  auto g = [&](double lam) { return L.mono(lam).theta - m * M_PI; };
  double ga = g(lo);
  while (ga >= 0) {
    lo -= 1.0 + std::abs(lo);
    ga = g(lo);
  }
  double step = std::max(1.0, fhi - lo + (m + 1) * (m + 1) / (4.0 * wmin));
  double hi = lo + step, gb = g(hi);
  while (gb <= 0) {
    lo = hi;
    ga = gb;
    step *= 2;
    hi = lo + step;
    gb = g(hi);
  }
  return solve_bracketed(g, lo, hi, ga, gb);
}

struct PeriodicEig {
  double lam = 0.0;
  bool doubled = false;
};

constexpr double kDoubleTol = 1e-9;

PeriodicEig periodic_eigenvalue(const Line& L, int n) {
  double flo, fhi, wmin;
  L.ranges(flo, fhi, wmin);
  const double floor = flo - 1.0;
  auto d = [&](double lam) { return L.mono(lam).trace() - 2.0; };
  if (n == 0) {
    const double mu1 = dirichlet(L, 1, floor);
    return {solve_bracketed(d, floor, mu1, d(floor), d(mu1)), false};
  }
  const int j = (n + 1) / 2;
  const double ma = dirichlet(L, 2 * j - 1, floor);
  const double mb = dirichlet(L, 2 * j, ma);
  const double db = d(mb);
  if (db <= kDoubleTol) return {mb, true};
  if (n % 2 == 1) return {solve_bracketed(d, ma, mb, d(ma), db), false};
  const double mc = dirichlet(L, 2 * j + 1, mb);
  return {solve_bracketed(d, mb, mc, db, d(mc)), false};
}

struct WorkingRoot {
  double x = 0.0, y = 0.0;  // working (µ², ν²)
  bool dbl2 = false, dbl3 = false;
};

WorkingRoot joint_root(const AngularOperators& ops, int n, int k, double hint) {
  auto inner = [&](double x, PeriodicEig* e2, PeriodicEig* e3) {
    const PeriodicEig a = periodic_eigenvalue(Line{&ops.row2, true, x}, n);
    const double y = -a.lam;
    const PeriodicEig b = periodic_eigenvalue(Line{&ops.row3, false, y}, k);
    if (e2) *e2 = a;
    if (e3) *e3 = b;
    return -(x + b.lam);  // increasing in x under the cone condition

  };
  auto G = [&](double x) { return inner(x, nullptr, nullptr); };
  double a = hint, ga = G(a);
  double step = 1.0 + 0.25 * std::abs(a);
  int guard = 0;
  while (ga > 0) {
    a -= step;
    step *= 2;
    ga = G(a);
    if (++guard > 40 || std::abs(a) > 1e8) throw Error(ErrorCode::NewtonStall, "no lower bracket for a joint eigenvalue");
  }
  double b = a + step, gb = G(b);
  while (gb < 0) {
    a = b;
    ga = gb;
    step *= 2;
    b = a + step;
    gb = G(b);
    if (++guard > 80 || std::abs(b) > 1e8) throw Error(ErrorCode::NewtonStall, "no upper bracket for a joint eigenvalue");
  }
  const double x = solve_bracketed(G, a, b, ga, gb);
  PeriodicEig e2, e3;
  inner(x, &e2, &e3);
  return {x, -e2.lam, e2.doubled, e3.doubled};
}

// Basis of periodic solutions at the working pair, with the closure residual.
std::vector<PeriodicMode> periodic_basis(const HillRow& row, double mu2, double nu2, bool doubled, double& residual) {
  Monodromy m = hill_monodromy(row, mu2, nu2, true);
  const Eigen::Matrix2d Mt = m.M * std::exp(m.log_scale);
  std::vector<Eigen::Vector2d> coeffs;
  if (doubled) {
    coeffs = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  } else {
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(Mt - Eigen::Matrix2d::Identity(), Eigen::ComputeFullV);
    coeffs = {svd.matrixV().col(1)};
  }
  const int N = static_cast<int>(m.xs.size()) - 1;
  std::vector<PeriodicMode> out;
  residual = 0.0;
  for (const auto& c : coeffs) {
    PeriodicMode pm;
    pm.h = kPeriod / N;
    pm.y.resize(N + 1);
    pm.dy.resize(N + 1);
    double scale = 0.0;
    for (int i = 0; i <= N; ++i) {
      const Eigen::Vector2d s = m.traj[i] * c;
      pm.y[i] = s(0);
      pm.dy[i] = s(1);
      scale = std::max(scale, std::abs(s(0)) + std::abs(s(1)));
    }
    const double r = (std::abs(pm.y[N] - pm.y[0]) + std::abs(pm.dy[N] - pm.dy[0])) / scale;
    residual = std::max(residual, r);
    // enforce exact closure for interpolation
    pm.y[N] = pm.y[0];
    pm.dy[N] = pm.dy[0];
    out.push_back(std::move(pm));
  }
  return out;
}

}  // namespace

std::vector<JointEigenpair> joint_spectrum_shooting(const AngularOperators& ops, const SpectrumRequest& req) {
  if (req.mu2_max <= 0 && req.count <= 0) throw Error(ErrorCode::ConfigError, "spectrum request needs mu2_max or count");
  const bool identity = ops.gauge.isApprox(Eigen::Matrix2d::Identity(), 0.0);
  const Eigen::Matrix2d Pinv = ops.gauge.inverse();
  std::map<std::pair<int, int>, WorkingRoot> memo;

  auto collect = [&](double box) {
    const double Bn = identity ? box - ops.shift(0)
                               : 4.0 * Pinv.cwiseAbs().rowwise().sum().maxCoeff() * (std::abs(box) + ops.shift.norm()) + 10.0;
    auto outside = [&](const WorkingRoot& r) { return identity ? r.x > Bn : std::max(std::abs(r.x), std::abs(r.y)) > Bn; };
    for (int n = 0;; ++n) {
      bool any = false;
      for (int k = 0;; ++k) {
        auto key = std::make_pair(n, k);
        auto it = memo.find(key);
        if (it == memo.end()) {
          double hint = 0.0;
          bool have = false;
          if (auto p = memo.find({n, k - 1}); p != memo.end()) hint = p->second.x, have = true;
          if (auto p = memo.find({n - 1, k}); p != memo.end()) hint = have ? std::max(hint, p->second.x) : p->second.x;
          it = memo.emplace(key, joint_root(ops, n, k, hint)).first;
        }
        if (outside(it->second)) break;
        any = true;
      }
      if (!any) break;
    }
  };

  auto build = [&](double box) {
    std::vector<JointEigenpair> out;
    for (const auto& [key, r] : memo) {
      const Eigen::Vector2d orig = ops.gauge * Eigen::Vector2d(r.x, r.y) + ops.shift;
      if (req.mu2_max > 0 && orig(0) > box) continue;
      bool merged = false;
      for (auto& p : out)
        if (std::abs(p.mu2 - orig(0)) <= 1e-6 * std::max(1.0, std::abs(orig(0))) &&
            std::abs(p.nu2 - orig(1)) <= 1e-6 * std::max(1.0, std::abs(orig(1)))) {
          merged = true;
          break;
        }
      if (merged) continue;
      JointEigenpair p;
      p.mu2 = orig(0);
      p.nu2 = orig(1);
      p.index2 = key.first;
      p.index3 = key.second;
      p.multiplicity = std::min(4, (r.dbl2 ? 2 : 1) * (r.dbl3 ? 2 : 1));
      out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.mu2 != b.mu2 ? a.mu2 < b.mu2 : a.nu2 < b.nu2; });
    return out;
  };

  std::vector<JointEigenpair> out;
  if (req.mu2_max > 0) {
    collect(req.mu2_max);
    out = build(req.mu2_max);
  } else {
    double box = 8.0;
    for (int iter = 0; iter < 20; ++iter, box *= 2) {
      collect(box);
      out = build(box);
      int inside = 0;
      for (const auto& p : out) inside += p.mu2 <= box;
      if (identity && inside >= req.count) break;
      if (!identity && inside >= req.count) {
        // enlarge once more and check that the prefix is stable
        collect(2 * box);
        auto again = build(2 * box);
        bool same = again.size() >= static_cast<size_t>(req.count);
        for (int i = 0; same && i < req.count; ++i)
          same = std::abs(again[i].mu2 - out[i].mu2) < 1e-9 && std::abs(again[i].nu2 - out[i].nu2) < 1e-9;
        out = again;
        if (same) break;
      }
    }
    if (static_cast<int>(out.size()) > req.count) out.resize(req.count);
  }
  if (req.eigenfunctions) {
    for (auto& p : out) {
      const Eigen::Vector2d w = Pinv * (Eigen::Vector2d(p.mu2, p.nu2) - ops.shift);
      const WorkingRoot& r = memo.at({p.index2, p.index3});
      p.v = periodic_basis(ops.row2, w(0), w(1), r.dbl2, p.residual_v);
      p.w = periodic_basis(ops.row3, w(0), w(1), r.dbl3, p.residual_w);
      p.multiplicity = std::min<int>(4, p.v.size() * p.w.size());
    }
  }
  return out;
}

JointEigenpair joint_eigenpair(const AngularOperators& ops, int index2, int index3, bool eigenfunctions) {
  if (index2 < 0 || index3 < 0) throw Error(ErrorCode::ConfigError, "periodic eigenvalue indices must be nonnegative");
  const WorkingRoot r = joint_root(ops, index2, index3, 0.0);
  JointEigenpair p;
  const Eigen::Vector2d orig = ops.gauge * Eigen::Vector2d(r.x, r.y) + ops.shift;
  p.mu2 = orig(0);
  p.nu2 = orig(1);
  p.index2 = index2;
  p.index3 = index3;
  p.multiplicity = (r.dbl2 ? 2 : 1) * (r.dbl3 ? 2 : 1);
  if (eigenfunctions) {
    p.v = periodic_basis(ops.row2, r.x, r.y, r.dbl2, p.residual_v);
    p.w = periodic_basis(ops.row3, r.x, r.y, r.dbl3, p.residual_w);
  }
  return p;
}

std::vector<Eigen::VectorXd> joint_modes(const AngularOperators& ops, const JointEigenpair& p, int N2, int N3) {
  const double h2 = kPeriod / N2, h3 = kPeriod / N3;
  Eigen::VectorXd wt(N2 * N3);
  for (int j = 0; j < N2; ++j)
    for (int k = 0; k < N3; ++k) wt(j * N3 + k) = ops.weight(j * h2, k * h3) * h2 * h3;
  std::vector<Eigen::VectorXd> raw;
  if (!p.v.empty()) {
    for (const auto& v : p.v) {
      const auto vs = v.sample(N2);
      for (const auto& w : p.w) {
        const auto ws = w.sample(N3);
        Eigen::VectorXd Y(N2 * N3);
        for (int j = 0; j < N2; ++j)
          for (int k = 0; k < N3; ++k) Y(j * N3 + k) = vs[j] * ws[k];
        raw.push_back(Y);
      }
    }
  } else {
    if (p.modes.empty() || p.modes[0].size() != N2 * N3)
      throw Error(ErrorCode::ConfigError, "oracle eigenpair sampled on a different grid");
    raw = p.modes;
  }
  std::vector<Eigen::VectorXd> out;
  for (auto Y : raw) {
    const double n0 = std::sqrt(Y.dot(wt.cwiseProduct(Y)));
    if (n0 == 0.0) continue;
    for (const auto& Z : out) Y -= Z.dot(wt.cwiseProduct(Y)) * Z;
    const double n1 = std::sqrt(Y.dot(wt.cwiseProduct(Y)));
    if (n1 < 1e-8 * n0) continue;  // aliased on this grid
    out.push_back(Y / n1);
  }
  return out;
}

AngularDiscretization discretize_angular(const AngularOperators& ops, int N) {
  if (N < 4 || N % 2) throw Error(ErrorCode::ConfigError, "angular grid must be even and at least 4");
  const double h = kPeriod / N;
  Eigen::MatrixXd D2(N, N);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      if (j == k) {
        D2(j, k) = -M_PI * M_PI / (3.0 * h * h) - 1.0 / 6.0;
      } else {
        const double s = std::sin((j - k) * h / 2.0);
        D2(j, k) = -((j - k) % 2 ? -1.0 : 1.0) / (2.0 * s * s);
      }
    }
  Eigen::MatrixXd A2 = -D2, A3 = -D2;
  Eigen::VectorXd a2(N), b2(N), a3(N), b3(N);
  for (int j = 0; j < N; ++j) {
    const double x = j * h;
    A2(j, j) -= ops.row2.phi()(x);
    A3(j, j) -= ops.row3.phi()(x);
    a2(j) = ops.row2.a()(x);
    b2(j) = ops.row2.b()(x);
    a3(j) = ops.row3.a()(x);
    b3(j) = ops.row3.b()(x);
  }
  AngularDiscretization d;
  d.N = N;
  const int n = N * N;
  d.KH = Eigen::MatrixXd::Zero(n, n);
  d.KL = Eigen::MatrixXd::Zero(n, n);
  d.sigma.resize(n);
  // K_H = −b3·(A2⊗I) + b2·(I⊗A3), K_L = a3·(A2⊗I) − a2·(I⊗A3), weight a2 b3 − b2 a3
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      const int r = j * N + k;
      d.sigma(r) = a2(j) * b3(k) - b2(j) * a3(k);
      for (int jj = 0; jj < N; ++jj) {
        d.KH(r, jj * N + k) += -b3(k) * A2(j, jj);
        d.KL(r, jj * N + k) += a3(k) * A2(j, jj);
      }
      for (int kk = 0; kk < N; ++kk) {
        d.KH(r, j * N + kk) += b2(j) * A3(k, kk);
        d.KL(r, j * N + kk) += -a2(j) * A3(k, kk);
      }
    }
  if (d.sigma.minCoeff() <= 0) throw Error(ErrorCode::NonPositiveCoefficient, "angular weight not positive");
  return d;
}

double commutator_norm(const AngularDiscretization& d) {
  const Eigen::VectorXd si = d.sigma.cwiseInverse();
  const Eigen::MatrixXd H = si.asDiagonal() * d.KH, L = si.asDiagonal() * d.KL;
  const Eigen::MatrixXd C = H * L - L * H;
  return C.norm() / (H.norm() * L.norm());
}

std::pair<double, double> discrete_eigen_residual(const AngularOperators& ops, const JointEigenpair& p, int N) {
  const AngularDiscretization d = discretize_angular(ops, N);
  const Eigen::Vector2d w = ops.gauge.inverse() * (Eigen::Vector2d(p.mu2, p.nu2) - ops.shift);
  const auto modes = joint_modes(ops, p, N, N);
  double rh = 0.0, rl = 0.0;
  for (const auto& Y : modes) {
    const Eigen::VectorXd sY = d.sigma.cwiseProduct(Y);
    rh = std::max(rh, (d.KH * Y - w(0) * sY).norm() / (sY.norm() * std::max(1.0, std::abs(w(0)))));
    rl = std::max(rl, (d.KL * Y - w(1) * sY).norm() / (sY.norm() * std::max(1.0, std::abs(w(1)))));
  }
  return {rh, rl};
}

std::vector<JointEigenpair> joint_spectrum_oracle(const AngularOperators& ops, int N, int count) {
  if (N < 32) throw Error(ErrorCode::ConfigError, "oracle grid must be at least 32");
  const AngularDiscretization d = discretize_angular(ops, N);
  const int n = N * N;
  const Eigen::VectorXd is = d.sigma.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd CH = is.asDiagonal() * d.KH * is.asDiagonal();
  const Eigen::MatrixXd CL = is.asDiagonal() * d.KL * is.asDiagonal();
  CH = 0.5 * (CH + CH.transpose()).eval();
  const int want = std::min(n, 4 * count + 32);
  std::vector<double> w(n);
  Eigen::MatrixXd Z(n, want);
  std::vector<lapack_int> support(2 * want);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, CH.data(), n, 0.0, 0.0, 1, want, 0.0, &found,
                                         w.data(), Z.data(), n, support.data());
  if (info != 0) throw Error(ErrorCode::EigsolverFailure, "dsyevr failed with info " + std::to_string(info));
  std::vector<JointEigenpair> out;
  const Eigen::Matrix2d P = ops.gauge;
  int start = 0;
  while (start < found) {
    int end = start + 1;
    while (end < found && std::abs(w[end] - w[end - 1]) <= 1e-6 * std::max(1.0, std::abs(w[end]))) ++end;
    if (end == found && found < n) break;  // cluster may continue past the computed range
    const Eigen::MatrixXd Zc = Z.middleCols(start, end - start);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Zc.transpose() * CL * Zc);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigsolverFailure, "compression of L failed");
    const Eigen::VectorXd nu = es.eigenvalues();
    double mu = 0.0;
    for (int i = start; i < end; ++i) mu += w[i];
    mu /= (end - start);
    int s = 0;
    while (s < nu.size()) {
      int e = s + 1;
      while (e < nu.size() && std::abs(nu(e) - nu(e - 1)) <= 1e-6 * std::max(1.0, std::abs(nu(e)))) ++e;
      JointEigenpair p;
      const Eigen::Vector2d orig = P * Eigen::Vector2d(mu, nu.segment(s, e - s).mean()) + ops.shift;
      p.mu2 = orig(0);
      p.nu2 = orig(1);
      p.multiplicity = e - s;
      for (int q = s; q < e; ++q) p.modes.push_back(is.cwiseProduct(Zc * es.eigenvectors().col(q)));
      out.push_back(std::move(p));
      s = e;
    }
    start = end;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.mu2 != b.mu2 ? a.mu2 < b.mu2 : a.nu2 < b.nu2; });
  if (static_cast<int>(out.size()) > count) out.resize(count);
  return out;
}

ConeDensityReport cone_density(const std::vector<JointEigenpair>& pairs, double c1, double c2, double epsilon, double radius,
                               int min_pairs) {
  ConeDensityReport r;
  r.epsilon = epsilon;
  r.c1 = c1;
  r.c2 = c2;
  r.min_ratio = 1e300;
  r.max_ratio = -1e300;
  std::vector<int> mult;
  for (const auto& p : pairs) {
    if (p.mu2 > 0) {
      const double q = p.nu2 / p.mu2;
      r.min_ratio = std::min(r.min_ratio, q);
      r.max_ratio = std::max(r.max_ratio, q);
      if (q >= c1 + epsilon && q <= c2 - epsilon && p.nu2 > 0) {
        r.pairs_in_cone.emplace_back(std::sqrt(p.mu2), std::sqrt(p.nu2));
        mult.push_back(p.multiplicity);
      }
    }
  }
  if (static_cast<int>(r.pairs_in_cone.size()) < std::max(1, min_pairs))
    throw Error(ErrorCode::InsufficientPairs, "only " + std::to_string(r.pairs_in_cone.size()) + " pairs inside the cone");
  r.h_min = 1e300;
  for (size_t a = 0; a < r.pairs_in_cone.size(); ++a)
    for (size_t b = a + 1; b < r.pairs_in_cone.size(); ++b)
      r.h_min = std::min(r.h_min, std::hypot(r.pairs_in_cone[a].first - r.pairs_in_cone[b].first,
                                             r.pairs_in_cone[a].second - r.pairs_in_cone[b].second));
  for (int i = 1; i <= 10; ++i) {
    const double rad = radius * i / 10.0;
    int cnt = 0;
    for (size_t a = 0; a < r.pairs_in_cone.size(); ++a)
      if (std::hypot(r.pairs_in_cone[a].first, r.pairs_in_cone[a].second) <= rad) cnt += mult[a];
    r.radii.push_back(rad);
    r.density.push_back(cnt / (rad * rad));
  }
  r.C1 = c1;
  r.C2 = c2;
  r.D1 = 1e300;
  r.D2 = -1e300;
  for (const auto& p : pairs) {
    r.D1 = std::min(r.D1, p.nu2 - c1 * p.mu2);
    r.D2 = std::max(r.D2, p.nu2 - c2 * p.mu2);
  }
  return r;
}

void write_spectrum_csv(const std::string& path, const std::vector<JointEigenpair>& pairs) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  out.precision(17);
  out << "m,mu2,nu2,multiplicity,residual_v,residual_w\n";
  for (size_t m = 0; m < pairs.size(); ++m)
    out << m << ',' << pairs[m].mu2 << ',' << pairs[m].nu2 << ',' << pairs[m].multiplicity << ',' << pairs[m].residual_v << ','
        << pairs[m].residual_w << '\n';
}

}  // namespace stackel
