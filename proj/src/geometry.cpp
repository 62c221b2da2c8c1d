#include "stackel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stackel/errors.hpp"

namespace stackel {

namespace {

double cof(const Eigen::Matrix3d& m, int k) {
  switch (k) {
    case 0: return m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    case 1: return -(m(0, 1) * m(2, 2) - m(0, 2) * m(2, 1));
    default: return m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  }
}

double det(const Eigen::Matrix3d& m) { return m(0, 0) * cof(m, 0) + m(1, 0) * cof(m, 1) + m(2, 0) * cof(m, 2); }

bool finite(const Jet& j) { return std::isfinite(j.v) && std::isfinite(j.d1) && std::isfinite(j.d2); }

UnivariateFn lincomb(double a, const UnivariateFn& f, double b, const UnivariateFn& g) {
  if (a == 0.0 && b == 0.0) return UnivariateFn::constant(0.0);
  if (b == 0.0) return a == 1.0 ? f : a * f;
  if (a == 0.0) return b == 1.0 ? g : b * g;
  return (a == 1.0 ? f : a * f) + (b == 1.0 ? g : b * g);
}

double wrap_angle(double y) {
  double r = std::fmod(y, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

struct MappedEntry final : UnivariateFn::Impl {
  UnivariateFn g, f;
  CoordinateMap map;
  bool periodic;
  Jet jet(double y) const override {
    const double x = map.inverse(periodic ? wrap_angle(y) : y);
    const Jet G = g.jet(x), F = f.jet(x);
    const double sf = std::sqrt(F.v);
    return {G.v, G.d1 / sf, G.d2 / F.v - G.d1 * F.d1 / (2.0 * F.v * F.v)};
  }
  double value(double y) const override { return g(map.inverse(periodic ? wrap_angle(y) : y)); }
  std::string describe() const override { return "mapped(" + g.describe() + ")"; }
};

struct MappedPotential final : UnivariateFn::Impl {
  UnivariateFn phi, f;
  CoordinateMap map;
  bool periodic;
  double value(double y) const override {
    return corrected_potential(phi, f, map.inverse(periodic ? wrap_angle(y) : y));
  }
  Jet jet(double y) const override {
    const double h = 1e-4;
    const double v0 = value(y), vp = value(y + h), vm = value(y - h);
    return {v0, (vp - vm) / (2 * h), (vp - 2 * v0 + vm) / (h * h)};
  }
  std::string describe() const override { return "mapped_potential(" + phi.describe() + ")"; }
};

struct MappedConformal final : ConformalField {
  std::shared_ptr<const ConformalField> base;
  std::array<CoordinateMap, 3> maps;
  Point3 to_x(const Point3& y) const {
    return {maps[0].inverse(y[0]), maps[1].inverse(wrap_angle(y[1])), maps[2].inverse(wrap_angle(y[2]))};
  }
  double value(const Point3& y) const override { return base->value(to_x(y)); }
  Point3 dlog(const Point3& y) const override {
    const Point3 x = to_x(y);
    Point3 d = base->dlog(x);
    for (int i = 0; i < 3; ++i) d[i] /= std::sqrt(maps[i].density()(x[i]));
    return d;
  }
};

}  // namespace

Eigen::Matrix3d StackelMatrix::values(const Point3& x) const {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = s[i][j](x[i]);
  return m;
}

StackelMatrix constant_stackel(const Eigen::Matrix3d& m, double A) {
  StackelMatrix S;
  S.A = A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) S.s[i][j] = UnivariateFn::constant(m(i, j));
  return S;
}

StackelJets stackel_jets(const StackelMatrix& S, const Point3& x) {
  Eigen::Matrix3d M0, D[3], E[3];
  Jet J[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      J[i][j] = S.s[i][j].jet(x[i]);
      if (!finite(J[i][j]))
        throw Error(ErrorCode::NonSmoothEntry, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                                   ") not finite at " + std::to_string(x[i]));
      M0(i, j) = J[i][j].v;
    }
  for (int i = 0; i < 3; ++i) {
    D[i] = M0;
    E[i] = M0;
    for (int j = 0; j < 3; ++j) {
      D[i](i, j) = J[i][j].d1;
      E[i](i, j) = J[i][j].d2;
    }
  }
  StackelJets out;
  out.det = det(M0);
  for (int k = 0; k < 3; ++k) out.cof[k] = cof(M0, k);
  for (int i = 0; i < 3; ++i) {
    const double r1 = det(D[i]) / out.det;
    double l1 = r1, l2 = det(E[i]) / out.det - r1 * r1;
    for (int k = 0; k < 3; ++k) {
      if (k == i) continue;
      const double c1 = cof(D[i], k) / out.cof[k];
      l1 -= c1;
      l2 -= cof(E[i], k) / out.cof[k] - c1 * c1;
    }
    out.dlog_rho[i] = l1;
    out.d2log_rho[i] = l2;
  }
  return out;
}

MetricEval metric_eval(const StackelMatrix& S, const ConformalField& c, const Point3& x) {
  const StackelJets sj = stackel_jets(S, x);
  MetricEval m;
  m.x = x;
  m.detS = sj.det;
  m.cofactors = sj.cof;
  m.c = c.value(x);
  if (!(m.c > 0.0)) throw Error(ErrorCode::NonPositiveCoefficient, "conformal factor not positive");
  m.dlog_c = c.dlog(x);
  const double c4 = m.c * m.c * m.c * m.c;
  for (int i = 0; i < 3; ++i) {
    m.h_sq[i] = sj.det / sj.cof[i];
    if (!(m.h_sq[i] > 0.0))
      throw Error(ErrorCode::NonPositiveCoefficient, "h_" + std::to_string(i + 1) + "^2 not positive");
    m.H_sq[i] = c4 * m.h_sq[i];
    m.gamma[i] = -0.5 * sj.dlog_rho[i];
    m.dgamma[i] = -0.5 * sj.d2log_rho[i];
    m.Gamma[i] = m.gamma[i] - 2.0 * m.dlog_c[i];
  }
  const double rho = sj.det / (sj.cof[0] * sj.cof[1] * sj.cof[2]);
  m.r_factor = std::pow(rho, -0.25) / m.c;
  return m;
}

MetricEval metric_eval(const StackelMatrix& S, const ConformalField& c, const Potentials& phi, const Point3& x) {
  MetricEval m = metric_eval(S, c, x);
  double z = 0.0;
  for (int i = 0; i < 3; ++i)
    z -= (phi[i](x[i]) + 0.25 * m.gamma[i] * m.gamma[i] - 0.5 * m.dgamma[i]) / m.h_sq[i];
  m.zeroth_order = z;
  return m;
}

double zeroth_order_at(const StackelMatrix& S, const Potentials& phi, const Point3& x) {
  static const ConstantConformal one(1.0);
  return metric_eval(S, one, phi, x).zeroth_order;
}

const ValidationItem* ValidationReport::find(const std::string& name) const {
  for (const auto& it : items)
    if (it.name == name) return &it;
  return nullptr;
}

ValidationReport validate_stackel(const StackelMatrix& S, int samples) {
  const int n = std::max(samples, 2);
  std::vector<double> x1(n + 1), xa(n);
  for (int k = 0; k <= n; ++k) x1[k] = S.A * k / n;
  for (int k = 0; k < n; ++k) xa[k] = kTwoPi * k / n;
  auto row_samples = [&](int i) -> const std::vector<double>& { return i == 0 ? x1 : xa; };

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (double x : row_samples(i))
        if (!finite(S.s[i][j].jet(x)))
          throw Error(ErrorCode::NonSmoothEntry, "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                                     ") has no finite jet at " + std::to_string(x));

  ValidationReport rep;
  auto sign_item = [&](const char* name, int i, int j, double sign) {
    double worst = std::numeric_limits<double>::infinity();
    for (double x : row_samples(i)) worst = std::min(worst, sign * S.s[i][j](x));
    rep.items.push_back({name, worst > 0.0, worst});
  };
  sign_item("s12>0", 0, 1, 1.0);
  sign_item("s13>0", 0, 2, 1.0);
  sign_item("s22<0", 1, 1, -1.0);
  sign_item("s23>0", 1, 2, 1.0);
  sign_item("s32>0", 2, 1, 1.0);
  sign_item("s33<0", 2, 2, -1.0);

  double min_abs_det = std::numeric_limits<double>::infinity(), min_det = min_abs_det, max_abs_det = 0.0;
  Point3 min_cof{min_abs_det, min_abs_det, min_abs_det};
  for (double a : x1)
    for (double b : xa)
      for (double c : xa) {
        const Eigen::Matrix3d m = S.values({a, b, c});
        const double d = det(m);
        min_abs_det = std::min(min_abs_det, std::abs(d));
        max_abs_det = std::max(max_abs_det, std::abs(d));
        min_det = std::min(min_det, d);
        for (int k = 0; k < 3; ++k) min_cof[k] = std::min(min_cof[k], cof(m, k));
      }
  rep.items.push_back({"det_nonzero", min_abs_det > 1e-12 * std::max(1.0, max_abs_det), min_abs_det});
  rep.items.push_back({"cof11>0", min_cof[0] > 0.0, min_cof[0]});
  rep.items.push_back({"cof21>0", min_cof[1] > 0.0, min_cof[1]});
  rep.items.push_back({"cof31>0", min_cof[2] > 0.0, min_cof[2]});
  rep.items.push_back({"det>0", min_det > 0.0, min_det});

  double c1 = -std::numeric_limits<double>::infinity(), c2 = std::numeric_limits<double>::infinity();
  for (double x : xa) {
    c1 = std::max(c1, -S.s[2][1](x) / S.s[2][2](x));
    c2 = std::min(c2, -S.s[1][1](x) / S.s[1][2](x));
  }
  rep.c1 = c1;
  rep.c2 = c2;
  rep.items.push_back({"cone c1<c2", c1 < c2, c2 - c1});

  double worst_mismatch = 0.0;
  for (int i = 1; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Jet a = S.s[i][j].jet(0.0), b = S.s[i][j].jet(kTwoPi);
      const double scale = 1.0 + std::abs(a.v) + std::abs(a.d1) + std::abs(a.d2);
      worst_mismatch = std::max({worst_mismatch, std::abs(a.v - b.v) / scale, std::abs(a.d1 - b.d1) / scale,
                                 std::abs(a.d2 - b.d2) / scale});
    }
  rep.items.push_back({"angular_periodicity", worst_mismatch <= 1e-8, 1e-8 - worst_mismatch});

  rep.valid = std::all_of(rep.items.begin(), rep.items.end(), [](const ValidationItem& it) { return it.passed; });
  return rep;
}

StackelMatrix column_gauge(const StackelMatrix& S, const Eigen::Matrix2d& G2) {
  if (std::abs(G2.determinant()) < 1e-14) throw Error(ErrorCode::SingularGauge, "column gauge is singular");
  const Eigen::Matrix2d inv = G2.inverse();
  StackelMatrix out = S;
  for (int i = 0; i < 3; ++i) {
    out.s[i][1] = lincomb(inv(0, 0), S.s[i][1], inv(1, 0), S.s[i][2]);
    out.s[i][2] = lincomb(inv(0, 1), S.s[i][1], inv(1, 1), S.s[i][2]);
  }
  return out;
}

StackelMatrix first_column_shift(const StackelMatrix& S, double C1, double C2) {
  StackelMatrix out = S;
  for (int i = 0; i < 3; ++i) {
    UnivariateFn extra = lincomb(C1, S.s[i][1], C2, S.s[i][2]);
    if (C1 != 0.0 || C2 != 0.0) out.s[i][0] = S.s[i][0] + extra;
  }
  return out;
}

Eigen::Matrix2d canonical_angular_gauge(const StackelMatrix& S, int samples, double pad) {
  struct Sample {
    Eigen::Vector2d v;
    int tag;  // 0: negated third row, 1: second row
    double angle = 0.0;
  };
  std::vector<Sample> pts;
  for (int k = 0; k < samples; ++k) {
    const double x = kTwoPi * k / samples;
    pts.push_back({Eigen::Vector2d(-S.s[2][1](x), -S.s[2][2](x)), 0});
    pts.push_back({Eigen::Vector2d(S.s[1][1](x), S.s[1][2](x)), 1});
  }
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) {
    if (p.v.norm() == 0.0) throw Error(ErrorCode::SingularGauge, "vanishing angular row");
    mean += p.v.normalized();
  }
  if (mean.norm() < 1e-12) throw Error(ErrorCode::SingularGauge, "angular cone is not pointed");
  for (auto& p : pts) p.angle = std::atan2(mean.x() * p.v.y() - mean.y() * p.v.x(), mean.dot(p.v));
  double lo = 1e300, hi = -1e300, max0 = -1e300, min0 = 1e300, max1 = -1e300, min1 = 1e300;
  for (const auto& p : pts) {
    lo = std::min(lo, p.angle);
    hi = std::max(hi, p.angle);
    if (p.tag == 0) {
      max0 = std::max(max0, p.angle);
      min0 = std::min(min0, p.angle);
    } else {
      max1 = std::max(max1, p.angle);
      min1 = std::min(min1, p.angle);
    }
  }
  if (hi - lo >= M_PI - 1e-9) throw Error(ErrorCode::SingularGauge, "angular cone is not pointed");
  // representative on an extreme ray: the longest sample along it (ratio along a ray is gauge invariant)
  auto extreme = [&](double target) {
    const Sample* best = nullptr;
    for (const auto& p : pts)
      if (std::abs(p.angle - target) <= 1e-9 && (!best || p.v.norm() > best->v.norm())) best = &p;
    return best->v;
  };
  const Eigen::Vector2d va = extreme(lo), vb = extreme(hi);
  Eigen::Matrix2d V;
  V.row(0) = va.transpose();
  V.row(1) = vb.transpose();
  if (std::abs(V.determinant()) < 1e-14) throw Error(ErrorCode::SingularGauge, "degenerate angular cone");
  Eigen::Matrix2d target;
  if (max0 <= min1 + 1e-12) {
    target << 0.0, 1.0, -1.0, 0.0;  // orientation preserving
  } else if (max1 <= min0 + 1e-12) {
    target << -1.0, 0.0, 0.0, 1.0;  // orientation reversing
  } else {
    throw Error(ErrorCode::SingularGauge, "angular rows interleave: cone condition c1 < c2 cannot hold");
  }
  Eigen::Matrix2d K;
  K << 1.0, -pad, -pad, 1.0;
  return V.inverse() * target * K;
}

std::optional<Eigen::Matrix2d> normalizing_gauge(const StackelMatrix& S, int samples) {
  try {
    return canonical_angular_gauge(S, samples).inverse();
  } catch (const Error&) {
    return std::nullopt;
  }
}

double corrected_potential(const UnivariateFn& phi, const UnivariateFn& f, double x) {
  const Jet F = f.jet(x);
  const double ldot = F.d1 / std::pow(F.v, 1.5);
  const double lddot = F.d2 / (F.v * F.v) - 1.5 * F.d1 * F.d1 / (F.v * F.v * F.v);
  return phi(x) / F.v - ldot * ldot / 16.0 - lddot / 4.0;
}

TransformedRow transform_row(const std::array<UnivariateFn, 3>& entries, const UnivariateFn& phi, const UnivariateFn& f,
                             double length, bool periodic) {
  TransformedRow out;
  const int n = 256;
  for (int k = 0; k <= n; ++k)
    if (!(f(length * k / n) > 0.0)) throw Error(ErrorCode::NonPositiveReparam, "density not positive at a sample");
  out.map = CoordinateMap(f, length);
  if (periodic && std::abs(out.map.total() - kTwoPi) > 1e-9)
    throw Error(ErrorCode::ConfigError, "angular reparametrization must preserve the period 2π");
  if (f.is_constant() && f.constant_value() == 1.0) {
    out.entries = entries;
    out.phi = phi;
    return out;
  }
  if (f.is_constant() && !periodic) {
    // linear map: y = sqrt(f) x
    const double fc = f.constant_value(), sf = std::sqrt(fc);
    for (int j = 0; j < 3; ++j) {
      const UnivariateFn g = entries[j];
      if (g.is_constant()) {
        out.entries[j] = UnivariateFn::constant(g.constant_value() / fc);
      } else {
        out.entries[j] = UnivariateFn::from_jet(
            [g, fc, sf](double y) {
              const Jet G = g.jet(y / sf);
              return Jet{G.v / fc, G.d1 / (fc * sf), G.d2 / (fc * fc)};
            },
            "scaled(" + g.describe() + ")");
      }
    }
    if (phi.is_constant()) {
      out.phi = UnivariateFn::constant(phi.constant_value() / fc);
    } else {
      const UnivariateFn p = phi;
      out.phi = UnivariateFn::from_jet(
          [p, fc, sf](double y) {
            const Jet P = p.jet(y / sf);
            return Jet{P.v / fc, P.d1 / (fc * sf), P.d2 / (fc * fc)};
          },
          "scaled(" + p.describe() + ")");
    }
    return out;
  }
  for (int j = 0; j < 3; ++j) {
    auto impl = std::make_shared<MappedEntry>();
    impl->g = entries[j] / f;
    impl->f = f;
    impl->map = out.map;
    impl->periodic = periodic;
    out.entries[j] = UnivariateFn(impl);
  }
  auto pimpl = std::make_shared<MappedPotential>();
  pimpl->phi = phi;
  pimpl->f = f;
  pimpl->map = out.map;
  pimpl->periodic = periodic;
  out.phi = UnivariateFn(pimpl);
  return out;
}

ReparamResult reparam(const StackelMatrix& S, const Potentials& phi, const std::array<UnivariateFn, 3>& f) {
  ReparamResult out;
  for (int i = 0; i < 3; ++i) {
    TransformedRow tr = transform_row(S.s[i], phi[i], f[i], i == 0 ? S.A : kTwoPi, i > 0);
    out.S.s[i] = tr.entries;
    out.phi[i] = tr.phi;
    out.maps[i] = tr.map;
  }
  out.S.A = out.maps[0].total();
  return out;
}

Model reparam_model(const Model& m, const std::array<UnivariateFn, 3>& f) {
  ReparamResult r = reparam(m.S, m.phi, f);
  Model out;
  out.S = r.S;
  out.phi = r.phi;
  if (auto cv = m.c->constant_value()) {
    out.c = std::make_shared<ConstantConformal>(*cv);
  } else {
    auto mc = std::make_shared<MappedConformal>();
    mc->base = m.c;
    mc->maps = r.maps;
    out.c = mc;
  }
  return out;
}

RadialNormalForm radial_normal_form(const UnivariateFn& s12, const UnivariateFn& s13, const UnivariateFn& phi1, double A) {
  RadialNormalForm nf;
  TransformedRow tr = transform_row({s12, s13, UnivariateFn::constant(0.0)}, phi1, s12, A, false);
  nf.map = tr.map;
  nf.Abar = tr.map.total();
  nf.s13bar = tr.entries[1];
  nf.phi1bar = tr.phi;
  const Jet j0 = s12.jet(0.0), jA = s12.jet(A);
  nf.s12_0 = j0.v;
  nf.s12_A = jA.v;
  nf.ds12_0 = j0.d1;
  nf.ds12_A = jA.d1;
  return nf;
}

RadialNormalForm radial_normal_form(const StackelMatrix& S, const UnivariateFn& phi1) {
  return radial_normal_form(S.s[0][1], S.s[0][2], phi1, S.A);
}

std::optional<Potentials> compatible_potentials(const StackelMatrix& S) {
  int varying = -1;
  for (int i = 0; i < 3; ++i) {
    bool all_const = true;
    for (int j = 0; j < 3; ++j) all_const = all_const && S.s[i][j].is_constant();
    if (!all_const) {
      if (varying >= 0) return std::nullopt;
      varying = i;
    }
  }
  Potentials phi{UnivariateFn::constant(0.0), UnivariateFn::constant(0.0), UnivariateFn::constant(0.0)};
  if (varying < 0) return phi;
  Expr e[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (!S.s[i][j].expr()) return std::nullopt;
      e[i][j] = *S.s[i][j].expr();
    }
  const Expr c0 = e[1][1] * e[2][2] - e[1][2] * e[2][1];
  const Expr c1 = -(e[0][1] * e[2][2] - e[0][2] * e[2][1]);
  const Expr c2 = e[0][1] * e[1][2] - e[0][2] * e[1][1];
  const Expr d = e[0][0] * c0 + e[1][0] * c1 + e[2][0] * c2;
  const Expr logrho = log(d) - log(c0) - log(c1) - log(c2);
  const Expr gamma = Expr::constant(-0.5) * logrho.derivative();
  const Expr p = Expr::constant(-0.25) * gamma * gamma + Expr::constant(0.5) * gamma.derivative();
  phi[varying] = UnivariateFn::from_expr(p);
  return phi;
}

}  // namespace stackel
