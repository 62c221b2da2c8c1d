// One PASS/FAIL line per acceptance criterion, with the measured margins and wall time.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "stackel/experiments.hpp"
#include "stackel/radial.hpp"

using namespace stackel;

namespace {

Fixture fixture(const std::string& name) { return load_fixture(std::string(STACKEL_FIXTURES "/") + name + ".json"); }
Model model(const std::string& name) { return build_model(fixture(name)); }

struct Outcome {
  bool pass = false;
  std::string details;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;
std::set<int> selected;  // empty runs everything

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  if (!selected.empty() && !selected.count(id)) return;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.details = std::string("exception: ") + e.what();
  }
  const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = t < limit_s;
  const bool ok = o.pass && in_time;
  failures += !ok;
  std::printf("%s criterion %d (%s): %s | %.1f s of %.0f s%s\n", ok ? "PASS" : "FAIL", id, name.c_str(), o.details.c_str(), t, limit_s,
              in_time ? "" : " (over time)");
  std::fflush(stdout);
}

RadialRow flat_row() { return RadialRow::of(model("f1")); }

// Closed-form flat spectrum: µ² = 2j² + k², ν² = j² + k² with multiplicities.
std::vector<std::array<double, 3>> flat_spectrum(int count) {
  std::set<std::array<double, 2>> seen;
  std::map<std::array<double, 2>, int> mult;
  for (int j = 0; j <= 12; ++j)
    for (int k = 0; k <= 12; ++k) mult[{double(2 * j * j + k * k), double(j * j + k * k)}] += (j > 0 ? 2 : 1) * (k > 0 ? 2 : 1);
  std::vector<std::array<double, 3>> out;
  for (const auto& [key, m] : mult) {
    if (static_cast<int>(out.size()) == count) break;
    out.push_back({key[0], key[1], double(m)});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  criterion(1, "Wronskian conservation", 5.0, [] {
    const RadialRow row = RadialRow::of(model("radial_variable"));
    std::mt19937 gen(0);
    std::uniform_real_distribution<double> U(-100.0, 100.0);
    FssOptions o;
    o.high_precision = true;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const FssData f = fss(row, {cplx(U(gen), U(gen)), cplx(U(gen), U(gen))}, o);
      worst = std::max({worst, std::abs(f.W0 - 1.0), std::abs(f.W1 - 1.0)});
    }
    return Outcome{worst <= 1e-10, fmt("max |W-1| = %.2e over 200 pairs", worst)};
  });

  criterion(2, "flat closed forms", 5.0, [] {
    const RadialRow row = flat_row();
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> U(-150.0, 150.0);
    std::vector<SpectralPair> pairs;
    pairs.push_back({cplx(-M_PI * M_PI + 1e-4, 0.0), 0.0});  // next to the first Dirichlet pole
    while (pairs.size() < 50) pairs.push_back({cplx(U(gen), U(gen)), cplx(U(gen), U(gen))});
    double eD = 0.0, eM = 0.0, eN = 0.0;
    for (const auto& p : pairs) {
      const WTData w = wt(row, p);
      const cplx k = std::sqrt(p.mu2 + p.nu2);
      const cplx D = std::sinh(k) / k, M = -k * std::cosh(k) / std::sinh(k);
      eD = std::max(eD, std::abs(w.Delta_value() - D) / std::abs(D));
      eM = std::max(eM, std::abs(w.M - M) / std::abs(M));
      eN = std::max(eN, std::abs(w.N - M) / std::abs(M));
    }
    const WTData z = wt(row, {0.0, 0.0});
    const double e0 = std::max(std::abs(z.Delta_value() - 1.0), std::abs(z.M + 1.0));
    const bool ok = eD <= 1e-8 && eM <= 1e-8 && eN <= 1e-8 && e0 <= 1e-10;
    return Outcome{ok, fmt("rel err Delta %.2e", eD) + fmt(", M %.2e", eM) + fmt(", N %.2e", eN) + fmt(", at (0,0) %.2e", e0)};
  });

  criterion(3, "flat joint spectrum", 60.0, [] {
    const AngularOperators ops = AngularOperators::of(model("f1"));
    const auto expect = flat_spectrum(20);
    const auto shoot = joint_spectrum_shooting(ops, {0.0, 20, false});
    double es = shoot.size() == 20 ? 0.0 : 1e300;
    bool mult_ok = true;
    for (const auto& p : shoot) {
      double best = 1e300;
      int m = 0;
      for (const auto& e : expect) {
        const double d = std::max(std::abs(p.mu2 - e[0]), std::abs(p.nu2 - e[1]));
        if (d < best) best = d, m = int(e[2]);
      }
      es = std::max(es, best);
      mult_ok = mult_ok && m == p.multiplicity;
    }
    const int N = 64;
    const auto orc = joint_spectrum_oracle(ops, N, 20);
    double eo = orc.size() == 20 ? 0.0 : 1e300;
    for (const auto& p : orc) {
      double best = 1e300;
      for (const auto& e : flat_spectrum(24)) best = std::min(best, std::max(std::abs(p.mu2 - e[0]), std::abs(p.nu2 - e[1])));
      eo = std::max(eo, best);
    }
    std::vector<int> ns{16, 24, 32};
    std::vector<double> norms;
    for (int n : ns) norms.push_back(commutator_norm(discretize_angular(ops, n)));
    const double worst = *std::max_element(norms.begin(), norms.end());
    const double order = fitted_order(ns, norms);
    // the tensor-product collocation commutes exactly, which is stronger than any decay order
    const bool comm_ok = worst <= 1e-12 || order >= 1.7;
    const bool ok = es <= 1e-8 && mult_ok && eo <= 5.0 / (N * N) && comm_ok;
    return Outcome{ok, fmt("shooting err %.2e", es) + (mult_ok ? " (multiplicities ok)" : " (multiplicity mismatch)") +
                           fmt(", oracle N=64 err %.2e", eo) + fmt(" vs %.2e", 5.0 / (N * N)) +
                           fmt(", commutator max %.2e", worst) + (worst <= 1e-12 ? " (exact)" : fmt(" order %.2f", order))};
  });

  criterion(4, "separated DN vs FD oracle", 120.0, [] {
    std::string details;
    bool ok = true;
    for (const std::string name : {"f1", "radial_variable"}) {
      const Model m = model(name);
      const AngularOperators ops = AngularOperators::of(m);
      const auto sp = joint_spectrum_shooting(ops, {40.0, 0, true});
      const ConvergenceReport r = compare_dn(m, ops, sp, {16, 24, 32}, 10, 8, 0, 64);
      ok = ok && r.order >= 1.7 && r.order <= 2.3;
      details += name + fmt(" order %.3f", r.order) + fmt(" [%.2f", r.min_order) + fmt(", %.2f]; ", r.max_order);
      if (name == "f1") {
        double worst = 0.0;
        for (int N : {16, 24, 32}) {
          const DnOperator op = assemble_dn(m, ops, sp, 64, N, N);
          const DiscreteLaplaceSystem sys(sample_metric(m, Grid3::cube(N, m.S.A)));
          BoundaryData f(N, N);
          std::fill(f.f0.begin(), f.f0.end(), 1.0);
          worst = std::max(worst, relative_l2(apply_dn(op, f).out, dn_oracle(sys, f)));
        }
        ok = ok && worst <= 1e-10;
        details += fmt("f1 constant data %.2e; ", worst);
      }
    }
    return Outcome{ok, details};
  });

  criterion(5, "gauge invariance", 60.0, [] {
    SuiteOptions opt;
    std::string details;
    bool ok = true;
    for (const std::string name : {"f1", "radial_variable"}) {
      const SuiteReport r = suite_gauge_invariance(fixture(name), opt);
      ok = ok && r.passed() && r.rows.size() == 3;
      details += name + ":";
      for (const auto& row : r.rows) {
        details += " " + row.name + fmt(" %.1e", row.worst_margin);
        if (row.details.contains("metric_defect")) details += fmt("/metric %.1e", row.details["metric_defect"].get<double>());
        if (row.status != "PASS") details += " " + row.status;
      }
      details += "; ";
    }
    return Outcome{ok, details};
  });

  criterion(6, "normal form links", 30.0, [] {
    double worst = 0.0, worst_omega = 0.0;
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> U(-80.0, 80.0), Y(-40.0, 40.0);
    for (const std::string name : {"radial_variable", "exp_radial", "bump"}) {
      const Model m = model(name);
      const RadialNormalForm nf = radial_normal_form(m.S, m.phi[0]);
      const RadialRow row = RadialRow::of(m);
      for (int i = 0; i < 20; ++i) {
        const LiouvilleReport r = liouville_wt(nf, row, {cplx(U(gen), U(gen)), cplx(U(gen), U(gen))});
        worst = std::max({worst, r.res_delta, r.res_D, r.res_M});
        const OmegaForm o = omega_form(row, Y(gen), Y(gen));
        worst_omega = std::max({worst_omega, o.res_delta, o.res_D});
      }
    }
    return Outcome{worst <= 1e-8 && worst_omega <= 1e-8,
                   fmt("max link residual %.2e", worst) + fmt(", omega form %.2e (3 fixtures x 20 pairs)", worst_omega)};
  });

  criterion(7, "asymptotic bounds", 60.0, [] {
    double worst = -1e300;
    std::string details;
    const Model m = model("radial_variable");
    const RadialNormalForm nf = radial_normal_form(m.S, m.phi[0]);
    for (const cplx nu2 : {cplx(0.0), cplx(25.0), cplx(-16.0, 4.0)}) {
      std::vector<cplx> mus;
      std::vector<double> x;
      for (int i = 0; i < 24; ++i) {
        const double r = 10.0 * std::pow(50.0, i / 23.0);
        for (double arg : {0.0, 0.4, 1.2}) {
          mus.push_back(std::polar(r, arg));
          x.push_back(r);
        }
      }
      const auto rows = asymptotic_residuals(nf, nu2, mus);
      std::vector<double> rd, rD;
      for (const auto& r : rows) rd.push_back(std::max(r.r_delta, 1e-300)), rD.push_back(std::max(r.r_D, 1e-300));
      const double gd = growth_exponent(x, rd), gD = growth_exponent(x, rD);
      worst = std::max({worst, gd, gD});
    }
    details = fmt("residual growth exponent max %.3f", worst);
    double fan = -1e300, raw = -1e300, top = 0.0;
    const Model f1 = model("f1");
    for (const std::string other : {"bump", "exp_radial", "radial_variable"}) {
      const FanGrowth g = cam_imaginary_growth(f1, model(other));
      fan = std::max(fan, g.majorant);
      raw = std::max(raw, g.raw);
      top = std::max(top, g.max_scaled);
    }
    details += fmt("; |F(iy,iy')|w: majorant exponent %.3f", fan) + fmt(", max |F|w %.3f", top) + fmt(", raw exponent %.2f", raw);
    return Outcome{worst <= 0.1 && fan <= 0.1, details};
  });

  criterion(8, "CAM zero set and falsification", 60.0, [] {
    SuiteOptions opt;
    const SuiteReport r = suite_cam(fixture("f1"), fixture("bump"), opt);
    double same = 0.0, bump = 0.0;
    bool rows_ok = true;
    for (const auto& row : r.rows) {
      if (row.name == "identical" || row.name == "column_gauge") {
        same = std::max(same, row.worst_margin);
        rows_ok = rows_ok && row.status == "PASS";
      }
      if (row.name == "fixture_pair") bump = row.worst_margin;
    }
    return Outcome{rows_ok && same <= 1e-8 && bump >= 1e-3,
                   fmt("identical/gauge max |F|/scale %.2e", same) + fmt(", s13 bump max |F|/scale %.2e", bump)};
  });

  criterion(9, "conformal factor and alpha quotient", 120.0, [] {
    std::string details;
    bool ok = true;
    {
      // vanishing zeroth-order term and constant data: the solve must return the constant
      const Fixture fx = fixture("radial_variable");
      const Grid3 g = Grid3::cube(16, fx.S.A);
      const BoundaryData eta = BoundaryData::sample(16, 16, [](double, double) { return 1.7; }, [](double, double) { return 1.7; });
      const ConformalSolution s = solve_conformal(fx.S, fx.phi, eta, g);
      const double dev = std::max(std::abs(s.c.max() - 1.7), std::abs(s.c.min() - 1.7));
      ok = ok && dev == 0.0;
      details += fmt("constant data deviation %.1e; ", dev);
    }
    auto study = [&](const std::string& name, const std::vector<int>& ns) {
      const Fixture fx = fixture(name);
      std::vector<double> d;
      for (int n : ns) {
        const Grid3 g = Grid3::cube(n, fx.S.A);
        const ConformalSolution a =
            solve_conformal(fx.S, fx.phi, BoundaryData::sample(n, n, [](double, double) { return 1.0; }, [](double, double) { return 1.0; }), g);
        const ConformalSolution b = solve_conformal(
            fx.S, fx.phi,
            BoundaryData::sample(
                n, n, [](double x, double y) { return 1.0 + 0.3 * std::cos(x) * std::sin(y); }, [](double x, double) { return 2.0 + 0.5 * std::sin(x); }),
            g);
        d.push_back(alpha_pde_check(fx.S, a.c, b.c).max_diff);
      }
      const double order = fitted_order(ns, d);
      ok = ok && order >= 1.7;
      details += name + fmt(" order %.2f", order) + fmt(" (max diff %.1e at finest); ", d.back());
    };
    study("radial_variable", {16, 24, 32});
    study("angular_variable", {32, 48, 64});
    return Outcome{ok, details};
  });

  criterion(10, "boundary recovery", 60.0, [] {
    std::string details;
    bool ok = true;
    for (const std::string name : {"scaled", "exp_radial"}) {
      const RecoveryEstimate e = boundary_recovery(model(name));
      const double r12 = std::abs(e.s12 - e.expected_s12) / e.expected_s12, r13 = std::abs(e.s13 - e.expected_s13) / e.expected_s13;
      ok = ok && r12 <= 0.05 && r13 <= 0.05;
      details += name + fmt(" s12 %.4f", e.s12) + fmt(" (rel %.1e)", r12) + fmt(", s13 %.4f", e.s13) + fmt(" (rel %.1e)", r13) +
                 fmt(", intercept %.3f", e.intercept) + fmt(" vs %.3f; ", e.expected_intercept);
    }
    return Outcome{ok, details};
  });

  criterion(11, "flat cone density", 30.0, [] {
    const Fixture fx = fixture("f1");
    const AngularOperators ops = AngularOperators::of(build_model(fx));
    const double mu2_max = 200.0;
    const auto pairs = joint_spectrum_shooting(ops, {mu2_max, 0, false});
    const ConeDensityReport c = cone_density(pairs, 0.5, 1.0, 0.05, std::sqrt(mu2_max));
    const double floor = fx.density_floor.value_or(0.1);
    const bool ok = c.min_ratio >= 0.5 - 1e-12 && c.max_ratio <= 1.0 + 1e-12 && c.h_min > 0.0 && c.density.back() > floor;
    return Outcome{ok, fmt("ratios in [%.6f", c.min_ratio) + fmt(", %.6f]", c.max_ratio) + fmt(", h_min %.3f", c.h_min) +
                           fmt(", N(r)/r^2 %.3f", c.density.back()) + fmt(" > floor %.2f", floor)};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
