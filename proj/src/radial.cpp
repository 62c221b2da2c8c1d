#include "stackel/radial.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>

#include "stackel/errors.hpp"

namespace stackel {

namespace mp = boost::multiprecision;
using HP = mp::cpp_bin_float_50;

struct RadialRow::Cache {
  std::mutex mu;
  std::map<int, std::shared_ptr<const Table>> tables;
};

RadialRow::RadialRow(UnivariateFn s12, UnivariateFn s13, UnivariateFn phi1, double A)
    : s12_(std::move(s12)), s13_(std::move(s13)), phi1_(std::move(phi1)), A_(A), cache_(std::make_shared<Cache>()) {
  const UnivariateFn* fs[3] = {&s12_, &s13_, &phi1_};
  for (int k = 0; k < 3; ++k) {
    auto [lo, hi] = sampled_range(*fs[k], 0.0, A_, 256);
    bounds_[k] = std::max(std::abs(lo), std::abs(hi));
  }
}

RadialRow RadialRow::of(const Model& m) { return of(m.S, m.phi); }
RadialRow RadialRow::of(const StackelMatrix& S, const Potentials& phi) { return RadialRow(S.s[0][1], S.s[0][2], phi[0], S.A); }
RadialRow RadialRow::of(const RadialNormalForm& nf) {
  return RadialRow(UnivariateFn::constant(1.0), nf.s13bar, nf.phi1bar, nf.Abar);
}

std::shared_ptr<const RadialRow::Table> RadialRow::table(int steps) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto it = cache_->tables.find(steps);
  if (it != cache_->tables.end()) return it->second;
  auto t = std::make_shared<Table>();
  t->steps = steps;
  t->h = A_ / steps;
  const int n = 2 * steps + 1;
  t->a.resize(n);
  t->b.resize(n);
  t->p.resize(n);
  for (int m = 0; m < n; ++m) {
    const double x = (m == n - 1) ? A_ : 0.5 * t->h * m;
    t->a[m] = s12_(x);
    t->b[m] = s13_(x);
    t->p[m] = phi1_(x);
  }
  cache_->tables[steps] = t;
  return t;
}

int RadialRow::steps_for(const SpectralPair& p, double step_scale, int min_steps) const {
  const double k = std::sqrt(std::abs(p.mu2) * bounds_[0] + std::abs(p.nu2) * bounds_[1] + bounds_[2]);
  const double need = std::max(static_cast<double>(min_steps), std::ceil(A_ * (1.0 + k) / step_scale));
  if (need > 1 << 26) throw Error(ErrorCode::IntegratorFailure, "spectral parameter too large for the step budget");
  int n = 1;
  while (n < need) n <<= 1;
  return n;
}

namespace {

using Mat2c = std::array<cplx, 4>;  // (y_c, y_c', y_s, y_s') column-major: columns are solutions

inline void rk4_step(Mat2c& Y, cplx q0, cplx qm, cplx q1, double h) {
  for (int col = 0; col < 2; ++col) {
    const cplx y = Y[2 * col], dy = Y[2 * col + 1];
    const cplx k1y = dy, k1d = q0 * y;
    const cplx k2y = dy + 0.5 * h * k1d, k2d = qm * (y + 0.5 * h * k1y);
    const cplx k3y = dy + 0.5 * h * k2d, k3d = qm * (y + 0.5 * h * k2y);
    const cplx k4y = dy + h * k3d, k4d = q1 * (y + h * k3y);
    Y[2 * col] = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    Y[2 * col + 1] = dy + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
  }
}

// 2×2 product C = A·B with matrices stored as (r0c0, r1c0, r0c1, r1c1)
inline Mat2c mul(const Mat2c& A, const Mat2c& B) {
  return {A[0] * B[0] + A[2] * B[1], A[1] * B[0] + A[3] * B[1], A[0] * B[2] + A[2] * B[3], A[1] * B[2] + A[3] * B[3]};
}

struct HC {
  HP re, im;
};
inline HC hmul(const HC& a, const HC& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline HC hadd(const HC& a, const HC& b) { return {a.re + b.re, a.im + b.im}; }
inline HC hfrom(cplx z) { return {HP(z.real()), HP(z.imag())}; }

struct Sweep {
  Mat2c Y{};
  double log_scale = 0.0;
  cplx W;
  std::vector<Mat2c> traj;
  std::vector<double> traj_scale;
};

Sweep sweep(const RadialRow::Table& t, const SpectralPair& p, bool backward, bool hp, bool keep) {
  const int N = t.steps;
  const double h = backward ? -t.h : t.h;
  auto q = [&](int m) { return p.mu2 * t.a[m] + p.nu2 * t.b[m] - t.p[m]; };
  Sweep out;
  out.Y = {1.0, 0.0, 0.0, 1.0};
  if (keep) {
    out.traj.reserve(N + 1);
    out.traj.push_back(out.Y);
    out.traj_scale.push_back(0.0);
  }
  if (!hp) {
    for (int n = 0; n < N; ++n) {
      const int m0 = backward ? 2 * (N - n) : 2 * n;
      const int mm = backward ? m0 - 1 : m0 + 1;
      const int m1 = backward ? m0 - 2 : m0 + 2;
      rk4_step(out.Y, q(m0), q(mm), q(m1), h);
      double mx = 0.0;
      for (const auto& z : out.Y) mx = std::max(mx, std::abs(z));
      if (!std::isfinite(mx)) throw Error(ErrorCode::IntegratorOverflow, "non-finite radial solution");
      if (mx > 1e100) {
        for (auto& z : out.Y) z /= mx;
        out.log_scale += std::log(mx);
      }
      if (keep) {
        out.traj.push_back(out.Y);
        out.traj_scale.push_back(out.log_scale);
      }
    }
    const cplx e2 = std::exp(2.0 * out.log_scale);
    out.W = (out.Y[0] * out.Y[3] - out.Y[1] * out.Y[2]) * e2;
    return out;
  }
  // step matrices multiplied in blocks of 16 in double, blocks accumulated in 50-digit floats
  std::array<HC, 4> acc{hfrom(1.0), hfrom(0.0), hfrom(0.0), hfrom(1.0)};
  Mat2c block{1.0, 0.0, 0.0, 1.0};
  int in_block = 0;
  auto flush = [&] {
    std::array<HC, 4> b{hfrom(block[0]), hfrom(block[1]), hfrom(block[2]), hfrom(block[3])};
    std::array<HC, 4> r{hadd(hmul(b[0], acc[0]), hmul(b[2], acc[1])), hadd(hmul(b[1], acc[0]), hmul(b[3], acc[1])),
                        hadd(hmul(b[0], acc[2]), hmul(b[2], acc[3])), hadd(hmul(b[1], acc[2]), hmul(b[3], acc[3]))};
    acc = r;
    block = {1.0, 0.0, 0.0, 1.0};
    in_block = 0;
  };
  for (int n = 0; n < N; ++n) {
    const int m0 = backward ? 2 * (N - n) : 2 * n;
    const int mm = backward ? m0 - 1 : m0 + 1;
    const int m1 = backward ? m0 - 2 : m0 + 2;
    Mat2c P{1.0, 0.0, 0.0, 1.0};
    rk4_step(P, q(m0), q(mm), q(m1), h);
    block = mul(P, block);
    if (++in_block == 16) flush();
  }
  if (in_block) flush();
  const HC det = hadd(hmul(acc[0], acc[3]), HC{-(acc[1].re * acc[2].re - acc[1].im * acc[2].im),
                                                 -(acc[1].re * acc[2].im + acc[1].im * acc[2].re)});
  out.W = cplx(static_cast<double>(det.re), static_cast<double>(det.im));
  HP mx = 0;
  for (const auto& z : acc) mx = std::max(mx, HP(mp::sqrt(z.re * z.re + z.im * z.im)));
  out.log_scale = mx > 1 ? static_cast<double>(mp::log(mx)) : 0.0;
  const HP scale = mx > 1 ? mx : HP(1);
  for (int k = 0; k < 4; ++k) out.Y[k] = cplx(static_cast<double>(acc[k].re / scale), static_cast<double>(acc[k].im / scale));
  return out;
}

}  // namespace

FssData fss(const RadialRow& row, const SpectralPair& p, const FssOptions& opt) {
  if (!(std::isfinite(p.mu2.real()) && std::isfinite(p.mu2.imag()) && std::isfinite(p.nu2.real()) && std::isfinite(p.nu2.imag())))
    throw Error(ErrorCode::IntegratorFailure, "non-finite spectral pair");
  const int N = row.steps_for(p, opt.step_scale, opt.min_steps);
  auto t = row.table(N);
  Sweep f0 = sweep(*t, p, false, opt.high_precision, opt.trajectory);
  Sweep f1 = sweep(*t, p, true, opt.high_precision, opt.trajectory);
  FssData d;
  d.steps = N;
  d.c0 = f0.Y[0];
  d.dc0 = f0.Y[1];
  d.s0 = f0.Y[2];
  d.ds0 = f0.Y[3];
  d.log_scale0 = f0.log_scale;
  d.c1 = f1.Y[0];
  d.dc1 = f1.Y[1];
  d.s1 = f1.Y[2];
  d.ds1 = f1.Y[3];
  d.log_scale1 = f1.log_scale;
  d.W0 = f0.W;
  d.W1 = f1.W;
  if (opt.trajectory) {
    d.xs.resize(N + 1);
    d.traj0.resize(N + 1);
    d.traj1.resize(N + 1);
    for (int n = 0; n <= N; ++n) {
      d.xs[n] = t->h * n;
      const double e0 = std::exp(f0.traj_scale[n]);
      for (int k = 0; k < 4; ++k) d.traj0[n][k] = f0.traj[n][k] * e0;
      const double e1 = std::exp(f1.traj_scale[N - n]);
      for (int k = 0; k < 4; ++k) d.traj1[n][k] = f1.traj[N - n][k] * e1;
    }
  }
  return d;
}

WTData wt(const FssData& f) {
  WTData w;
  w.Delta = f.s0;
  w.D = f.c0;
  w.E = -f.ds0;
  w.log_scale = f.log_scale0;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  w.is_pole = std::abs(w.Delta) < 1e-8 * (std::exp(-w.log_scale) + std::abs(w.D) + std::abs(w.E));
  if (w.is_pole) {
    w.M = w.N = cplx(nan, nan);
    return w;
  }
  w.M = -w.D / w.Delta;
  w.N = w.E / w.Delta;
  const cplx psiA = w.D + w.M * w.Delta;
  w.weyl_residual_A = std::abs(psiA) / (std::abs(w.D) + std::abs(w.M * w.Delta));
  const cplx phi0 = f.c1 - w.N * f.s1;
  const double den = std::abs(f.c1) + std::abs(w.N * f.s1);
  w.weyl_residual_0 = den > 0 ? std::abs(phi0) / den : 0.0;
  return w;
}

WTData wt(const RadialRow& row, const SpectralPair& p, const FssOptions& opt) { return wt(fss(row, p, opt)); }

WTData wt_regular(const RadialRow& row, const SpectralPair& p, const FssOptions& opt) {
  WTData w = wt(row, p, opt);
  if (w.is_pole) throw Error(ErrorCode::PoleAtDirichletEigenvalue, "spectral pair lies on the Dirichlet spectrum");
  return w;
}

Eigen::Matrix2cd bvp_derivative_map(const WTData& w) {
  if (w.is_pole) throw Error(ErrorCode::PoleAtDirichletEigenvalue, "derivative map undefined at a pole");
  const cplx id = w.inv_Delta();
  Eigen::Matrix2cd m;
  m << w.M, id, -id, -w.N;
  return m;
}

LiouvilleReport liouville_wt(const RadialNormalForm& nf, const RadialRow& row, const SpectralPair& p) {
  const WTData w = wt(row, p);
  const WTData q = wt(RadialRow::of(nf), p);
  LiouvilleReport r;
  r.log_scale_q = q.log_scale;
  r.Delta_q = q.Delta;
  r.D_q = q.D;
  r.M_q = q.M;
  const double rel = std::exp(q.log_scale - w.log_scale);
  const double s0 = nf.s12_0, sA = nf.s12_A;
  const cplx dq = q.Delta * rel, Dq = q.D * rel;
  const cplx pred_delta = dq / std::pow(s0 * sA, 0.25);
  r.res_delta = std::abs(w.Delta - pred_delta) / (std::abs(w.Delta) + std::abs(pred_delta));
  const cplx t1 = std::pow(s0 / sA, 0.25) * Dq;
  const cplx t2 = nf.ds12_0 / (4.0 * std::pow(s0, 1.25) * std::pow(sA, 0.25)) * dq;
  r.res_D = std::abs(w.D - t1 - t2) / (std::abs(w.D) + std::abs(t1) + std::abs(t2));
  if (!w.is_pole && !q.is_pole) {
    const cplx u1 = -0.25 * nf.ds12_0 / s0, u2 = std::sqrt(s0) * q.M;
    r.res_M = std::abs(w.M - u1 - u2) / (std::abs(w.M) + std::abs(u1) + std::abs(u2));
  }
  return r;
}

std::vector<AsymptoticRow> asymptotic_residuals(const RadialNormalForm& nf, cplx nu2, const std::vector<cplx>& mus) {
  const RadialRow row = RadialRow::of(nf);
  const double Ab = nf.Abar;
  FssOptions opt;
  opt.step_scale = 0.004;
  std::vector<AsymptoticRow> out;
  for (const cplx mu : mus) {
    const WTData w = wt(row, {mu * mu, nu2}, opt);
    const double e = std::abs(mu.real()) * Ab;
    const cplx g = std::exp(w.log_scale - e);
    const cplx sh = 0.5 * (std::exp(Ab * mu - e) - std::exp(-Ab * mu - e));
    const cplx ch = 0.5 * (std::exp(Ab * mu - e) + std::exp(-Ab * mu - e));
    AsymptoticRow r;
    r.mu = mu;
    r.r_delta = std::abs(w.Delta * g - sh / mu) * std::norm(mu);
    r.r_D = std::abs(w.D * g - ch) * std::abs(mu);
    out.push_back(r);
  }
  return out;
}

OmegaForm omega_form(const RadialRow& row, double y, double yp) {
  const double w2 = y * y + yp * yp;
  if (!(w2 > 0.0)) throw Error(ErrorCode::ConfigError, "omega form needs (y, y') != (0, 0)");
  OmegaForm o;
  o.omega = std::sqrt(w2);
  UnivariateFn r;
  if (yp == 0.0) r = row.s12();
  else if (y == 0.0) r = row.s13();
  else r = (y * y / w2) * row.s12() + (yp * yp / w2) * row.s13();
  auto [lo, hi] = sampled_range(r, 0.0, row.A(), 512);
  o.rmin = lo;
  o.rmax = hi;
  const RadialNormalForm nf = radial_normal_form(r, UnivariateFn::constant(0.0), row.phi1(), row.A());
  o.Cbar = nf.Abar;
  // both solves grow like exp(C̄ω); a finer step keeps the link residual near 1e-10
  FssOptions fine;
  fine.step_scale = 0.006;
  const WTData q = wt(RadialRow::of(nf), {cplx(-w2), 0.0}, fine);
  const WTData w = wt(row, {cplx(-y * y), cplx(-yp * yp)}, fine);
  const cplx dq = q.Delta_value(), Dq = q.D_value();
  o.Delta_q = dq.real();
  o.D_q = Dq.real();
  const double r0 = nf.s12_0, rA = nf.s12_A;
  const cplx pd = dq / std::pow(r0 * rA, 0.25);
  const cplx Dw = w.D_value(), dw = w.Delta_value();
  o.res_delta = std::abs(dw - pd) / (std::abs(dw) + std::abs(pd));
  const cplx t1 = std::pow(r0 / rA, 0.25) * Dq;
  const cplx t2 = nf.ds12_0 / (4.0 * std::pow(r0, 1.25) * std::pow(rA, 0.25)) * dq;
  o.res_D = std::abs(Dw - t1 - t2) / (std::abs(Dw) + std::abs(t1) + std::abs(t2));
  o.asym_delta = std::abs(o.Delta_q - std::sin(o.Cbar * o.omega) / o.omega) * w2;
  o.asym_D = std::abs(o.D_q - std::cos(o.Cbar * o.omega)) * o.omega;
  return o;
}

CamEvaluation cam_F(const RadialRow& a, const RadialRow& b, cplx mu, cplx nu) {
  const SpectralPair p{mu * mu, nu * nu};
  const WTData wa = wt(a, p), wb = wt(b, p);
  CamEvaluation c;
  const cplx t1 = wa.D * wb.Delta, t2 = wb.D * wa.Delta;
  c.F = t1 - t2;
  c.log_scale = wa.log_scale + wb.log_scale;
  const double den = std::abs(t1) + std::abs(t2);
  c.relative = den > 0 ? std::abs(c.F) / den : 0.0;
  c.log_abs = std::log(std::abs(c.F)) + c.log_scale;
  c.log_bound_scale = std::log(den) + c.log_scale;
  return c;
}

double root_length(const UnivariateFn& s, double A) { return CoordinateMap(s, A).total(); }

double growth_exponent(const std::vector<double>& x, const std::vector<double>& y, int bins) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  double lo = 1e300, hi = 0.0;
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo > 0.0) || hi <= lo) return 0.0;
  std::vector<double> best(bins, 0.0), bx(bins, 0.0);
  const double L = std::log(hi / lo);
  for (size_t k = 0; k < x.size(); ++k) {
    int b = std::min(bins - 1, static_cast<int>(std::log(x[k] / lo) / L * bins));
    if (y[k] > best[b]) {
      best[b] = y[k];
      bx[b] = x[k];
    }
  }
  std::vector<double> lx, ly;
  for (int b = 0; b < bins; ++b)
    if (best[b] > 1e-300) {
      lx.push_back(std::log(bx[b]));
      ly.push_back(std::log(best[b]));
    }
  if (lx.size() < 2) return 0.0;
  double mx = 0, my = 0;
  for (size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0, sxx = 0;
  for (size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

void write_wt_csv(const std::string& path, const std::vector<std::pair<SpectralPair, WTData>>& rows) {
  std::ofstream out(path);
  out.precision(17);
  out << "re_mu,im_mu,re_nu,im_nu,re_Delta,im_Delta,re_M,im_M,re_N,im_N,is_pole\n";
  for (const auto& [p, w] : rows) {
    const cplx mu = std::sqrt(p.mu2), nu = std::sqrt(p.nu2);
    const cplx d = w.Delta_value();
    out << mu.real() << ',' << mu.imag() << ',' << nu.real() << ',' << nu.imag() << ',' << d.real() << ',' << d.imag() << ','
        << w.M.real() << ',' << w.M.imag() << ',' << w.N.real() << ',' << w.N.imag() << ',' << (w.is_pole ? 1 : 0) << '\n';
  }
}

}  // namespace stackel
