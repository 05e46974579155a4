#include <doctest.h>

#include "symfi/poisson.hpp"
#include "symfi/qfi.hpp"

using namespace symfi;
using namespace symfi::qfi;
using geom::KtParams;
using geom::SymTensorField;
using geom::VectorField;
using ex::Expr;
using ex::parse;

namespace {

std::vector<Point7> pts(int n, std::uint64_t seed = 42) {
  Rng rng(seed);
  std::vector<Point7> out;
  for (int k = 0; k < n; ++k) out.push_back(draw_point(rng, SampleBox{}));
  return out;
}

double dev(const Expr& a, const Expr& b, const ParamSet& ps,
           std::span<const Point7> sample) {
  return poisson::max_abs_on(a - b, ps, sample);
}

VectorField vf(const char* a, const char* b, const char* c,
               std::initializer_list<const char*> params = {}) {
  return {{parse(a, params), parse(b, params), parse(c, params)}};
}

}  // namespace

TEST_CASE("build_I11: separable x-integral") {
  KtParams p;
  p[3] = 0.5;  // C = diag(1/2, 0, 0)
  ParamSet ps;
  Expr V = parse("x^2 + y^2", {});
  Expr G = parse("x^2", {});
  auto I = build_I11(geom::general_kt(p), geom::zero_vector(), G, V);
  CHECK(I.family == Family::I10);
  auto sample = pts(40);
  CHECK(dev(I.expression, parse("(1/2)*vx^2 + x^2", {}), ps, sample) < 1e-14);
  CHECK(poisson::max_abs_on(poisson::total_time_derivative(I.expression, V),
                            ps, sample) < 1e-12);
}

TEST_CASE("build_I11 reproduces the constant-KT planar-wave QFI") {
  // a3 = a, a17 = b/2, a19 = c/2 with (a,b,c) = (2,3,6), so the root is 7.
  KtParams p;
  p[3] = 2;
  p[17] = 1.5;
  p[19] = 3;
  ParamSet ps;
  Expr V = parse(
      "(6*z + 3*y + 9*x)^2 + (6*z + 3*y - 5*x)^2 + (3*z - 6*y)^2", {});
  Expr G = parse("9*(6*z + 3*y + 9*x)^2 - 5*(6*z + 3*y - 5*x)^2", {});
  auto I = build_I11(geom::general_kt(p), geom::zero_vector(), G, V);
  auto sample = pts(60, 3);
  Expr claimed = parse(
      "(2*vx + 3*vy + 6*vz)*vx + 2*((6*z + 3*y + 9*x)^2 + (6*z + 3*y - 5*x)^2)"
      " + 7*((6*z + 3*y + 9*x)^2 - (6*z + 3*y - 5*x)^2)", {});
  CHECK(dev(I.expression, claimed, ps, sample) < 1e-10);
  CHECK(poisson::max_abs_on(poisson::total_time_derivative(I.expression, V),
                            ps, sample) < 1e-10);
  // And the integrability residuals pass.
  auto rep = residuals_I11(p, geom::zero_vector(), V, ps, sample, 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("build_I11 with all inputs zero gives the zero expression") {
  auto I = build_I11(geom::general_kt(KtParams{}), geom::zero_vector(), Expr(),
                     Expr());
  CHECK(I.expression.is_zero());
}

TEST_CASE("build_I20: Killing vector with ignorable coordinate") {
  ParamSet ps;
  Expr V = parse("y^2 + z^2", {});
  auto I = build_I20(vf("1", "0", "0"), V);
  auto sample = pts(30, 5);
  CHECK(dev(I.expression, parse("vx", {}), ps, sample) < 1e-14);
  CHECK(build_I20(geom::zero_vector(), V).expression.is_zero());
}

TEST_CASE("build_I20 reproduces the time-dependent QFI of the z/(r R^2) row") {
  ParamSet ps;
  ps.set("k0", 2.0);
  ps.set("k1", 3.0);
  auto ctx = ps.parse_context();
  Expr V = parse("(k0 + k1*z/r)/R^2", ctx);
  VectorField L = vf("x*z", "y*z", "-R^2");
  auto I = build_I20(L, V);
  auto sample = pts(60, 7);
  // J1 is the generated autonomous QFI; the row form is I = -J1 t + L.v.
  Expr J1 = parse("M2*vx - M1*vy + 2*z*k0/R^2 + 2*k1*z^2/(r*R^2) + k1/r", ctx);
  Expr claimed = parse("z*(x*vx + y*vy) - R^2*vz", ctx) - parse("t", {}) * J1;
  CHECK(dev(I.expression, claimed, ps, sample) < 1e-11);
  CHECK(poisson::max_abs_on(poisson::total_time_derivative(I.expression, V),
                            ps, sample) < 1e-11);
  // d/dt of the expression is minus the autonomous QFI.
  CHECK(dev(I.expression.diff(0), -J1, ps, sample) < 1e-11);
  CHECK(residuals_I20(L, V, ps, sample, 1e-10).pass);
}

TEST_CASE("residuals_I20 rejects the k2/r term") {
  // With a -k2/r term present the vector condition fails (k2 must vanish).
  ParamSet ps;
  ps.set("k1", 3.0);
  ps.set("k2", 1.0);
  auto ctx = ps.parse_context();
  Expr V = parse("(y/x)^2/R^2 + k1*z/(r*R^2) - k2/r", ctx);
  VectorField L = vf("x*z", "y*z", "-R^2");
  auto sample = pts(60, 9);
  auto rep = residuals_I20(L, V, ps, sample, 1e-10);
  CHECK_FALSE(rep.pass);
  // The zero vector trivially passes for any V.
  CHECK(residuals_I20(geom::zero_vector(), V, ps, sample, 1e-12).pass);
}

TEST_CASE("build_I3 matches the exponential LFI and its condition") {
  ParamSet ps;
  ps.set("c2", 3.0);
  Complex lam(2.0, 0.0);
  ps.set("lam", lam);
  auto ctx = ps.parse_context();
  Expr V = parse("-(lam^2/2)*x^2 + c2*x + y^2 + z^2", ctx);
  VectorField L = vf("1", "0", "0");
  auto I = build_I3(L, lam, V);
  CHECK(I.family == Family::I3);
  auto sample = pts(50, 11);
  Expr claimed = parse("exp(lam*t)*(lam*vx - lam^2*x + c2)", ctx);
  CHECK(dev(I.expression, claimed, ps, sample) < 1e-10);
  CHECK(residual_I3(L, lam, V, ps, sample, 1e-10).pass);
  CHECK(poisson::max_abs_on(poisson::total_time_derivative(I.expression, V),
                            ps, sample) < 1e-9);
}

TEST_CASE("build_I3 with the homothetic vector (catalog sign convention)") {
  ParamSet ps;
  Complex lam(2.0, 0.0);
  ps.set("lam", lam);
  ps.set("k", 5.0);
  auto ctx = ps.parse_context();
  // V = -lam^2 r^2/8 + F(y/x, z/x)/z^2 with F = const k.
  Expr V = parse("-(lam^2/8)*r^2 + k/z^2", ctx);
  VectorField L = vf("x", "y", "z");
  auto I = build_I3(L, lam, V);
  auto sample = pts(50, 13);
  // Sign convention: the catalog rows carry the negative of the builder's form.
  Expr table_form = parse(
      "exp(lam*t)*(vx^2 + vy^2 + vz^2 - lam*(x*vx + y*vy + z*vz)"
      " + (lam^2/4)*r^2 + 2*k/z^2)", ctx);
  CHECK(dev(I.expression, -table_form, ps, sample) < 1e-9);
  CHECK(residual_I3(L, lam, V, ps, sample, 1e-10).pass);
  // lambda = 0 is rejected.
  CHECK_THROWS_AS(build_I3(L, Complex(0, 0), V), std::invalid_argument);
  // L = 0 gives the zero expression.
  CHECK(build_I3(geom::zero_vector(), lam, V).expression.is_zero());
}

TEST_CASE("residual_I3 detects a missing lambda^2 term") {
  ParamSet ps;
  auto sample = pts(40, 17);
  // lambda = 1, L = (1,0,0), V = 0: residual is lambda^2 L = 1.
  auto rep = residual_I3(vf("1", "0", "0"), Complex(1, 0), Expr(), ps, sample,
                         1e-10);
  CHECK_FALSE(rep.pass);
  CHECK(rep.conditions[0].max_residual == doctest::Approx(1.0));
}

TEST_CASE("residual_LFI") {
  ParamSet ps;
  ps.set("c1", 2.0);
  ps.set("c2", 3.0);
  ps.set("c3", 5.0);
  auto ctx = ps.parse_context();
  auto sample = pts(50, 19);
  // V = c1 x + F(y - c2 x, z - c3 x), F = s1^2 + s2^2.
  Expr V = parse("c1*x + (y - c2*x)^2 + (z - c3*x)^2", ctx);
  VectorField L = vf("1", "c2", "c3", {"c2", "c3"});
  auto rep = residual_LFI(L, V, Complex(2.0, 0.0), ps, sample, 1e-10);
  CHECK(rep.pass);  // s = c1 = 2
  // Wrong constant fails.
  CHECK_FALSE(residual_LFI(L, V, Complex(1.0, 0.0), ps, sample, 1e-10).pass);
  // V = x^2 has no constant s.
  CHECK_FALSE(
      residual_LFI(vf("1", "0", "0"), parse("x^2", {}), Complex(0, 0), ps,
                   sample, 1e-10)
          .pass);
  // Constant V passes with s = 0.
  CHECK(residual_LFI(vf("1", "0", "0"), Expr::constant(4.0), Complex(0, 0), ps,
                     sample, 1e-10)
            .pass);
  // Non-KV input is rejected.
  CHECK_THROWS_AS(
      residual_LFI(vf("x", "0", "0"), V, Complex(0, 0), ps, sample, 1e-10),
      std::invalid_argument);
}

TEST_CASE("closed-form integrability conditions equal -1/2 curl of 2 C grad V") {
  // First-principles cross-check of the transcription.
  Rng rng(23);
  auto sample = pts(40, 29);
  ParamSet ps;
  Expr V = parse("x^2*y + z^3/(1 + x^2) + y^2*z", {});
  for (int round = 0; round < 10; ++round) {
    KtParams p;
    for (int k = 0; k < 20; ++k)
      p.a[k] = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    std::array<Expr, 20> ac;
    for (int k = 0; k < 20; ++k) ac[k] = Expr::constant(p.a[k]);
    auto conds = i11_integrability_conditions(ac, V);
    auto curls = curl_of_gradient_candidate(geom::general_kt(p),
                                            geom::zero_vector(), V);
    for (int k = 0; k < 3; ++k)
      CHECK(dev(conds[k], Expr::constant(-0.5) * curls[k], ps, sample) < 1e-10);
  }
}

TEST_CASE("residuals_I11 on the inverse-square family") {
  ParamSet ps;
  ps.set("k1", 2.0);
  ps.set("k2", 3.0);
  ps.set("k3", 5.0);
  auto ctx = ps.parse_context();
  Expr V = parse("k1/x^2 + k2/y^2 + k3/z^2", ctx);
  auto sample = pts(200, 31);
  KtParams a6;
  a6[6] = 1;
  CHECK(residuals_I11(a6, geom::zero_vector(), V, ps, sample, 1e-10).pass);
  // V = x^3 y with a constant diagonal KT fails: the xy condition is 3 x^2.
  KtParams a3;
  a3[3] = 1;
  auto rep = residuals_I11(a3, geom::zero_vector(), parse("x^3*y", {}), ps,
                           sample, 1e-10);
  CHECK_FALSE(rep.pass);
  // V = 0 passes for any KT.
  Rng rng(5);
  KtParams any;
  for (int k = 0; k < 20; ++k) any.a[k] = rng.uniform(-1, 1);
  CHECK(residuals_I11(any, geom::zero_vector(), Expr(), ps, sample, 1e-12)
            .pass);
}

TEST_CASE("planar restriction collapses to a single condition") {
  // With all z-dependence and z-components zeroed, the xz and yz conditions
  // vanish identically and only the Bertrand-Darboux condition remains.
  Rng rng(37);
  ParamSet ps;
  auto sample = pts(60, 41);
  Expr V = parse("x^2*y^2 + x/(1 + y^2)", {});
  for (int round = 0; round < 10; ++round) {
    std::array<Expr, 20> ac;
    for (int k = 0; k < 20; ++k) ac[k] = Expr();
    for (int k : {3, 5, 6, 13, 15, 17})
      ac[k - 1] = Expr::constant(rng.uniform(-1, 1));
    auto conds = i11_integrability_conditions(ac, V);
    CHECK(poisson::max_abs_on(conds[1], ps, sample) < 1e-13);
    CHECK(poisson::max_abs_on(conds[2], ps, sample) < 1e-13);
  }
}

TEST_CASE("reconstruct_G: separable case") {
  KtParams p;
  p[3] = 0.5;
  ParamSet ps;
  Expr V = parse("x^2", {});
  Complex g = reconstruct_G(geom::general_kt(p), geom::zero_vector(), V, ps,
                            {0, 0, 0}, {2, 0, 0});
  CHECK(std::abs(g - Complex(4.0)) < 1e-10);
}

TEST_CASE("reconstruct_G recovers F1(y/x) for the M3^2 tensor") {
  KtParams p;
  p[6] = 1;
  ParamSet ps;
  Expr V = parse("(y/x)^2/R^2", {});
  qfi::Point3 p1{1.0, 1.0, 0.5}, p2{1.3, 0.7, 1.1};
  Complex g = reconstruct_G(geom::general_kt(p), geom::zero_vector(), V, ps,
                            p1, p2);
  double f1 = (0.7 / 1.3) * (0.7 / 1.3), f0 = 1.0;
  CHECK(std::abs(g - Complex(f1 - f0)) < 1e-9);
}

TEST_CASE("reconstruct_G path independence holds iff the conditions hold") {
  ParamSet ps;
  ps.set("k1", 2.0);
  ps.set("k2", 3.0);
  ps.set("k3", 5.0);
  Expr V = parse("k1/x^2 + k2/y^2 + k3/z^2", ps.parse_context());
  KtParams a6;
  a6[6] = 1;
  qfi::Point3 base{0.7, 0.9, 1.1}, tgt{1.4, 1.3, 0.6};
  auto C = geom::general_kt(a6);
  Complex direct = reconstruct_G(C, geom::zero_vector(), V, ps, base, tgt);
  std::array<qfi::Point3, 4> path{base, qfi::Point3{1.4, 0.9, 1.1},
                                  qfi::Point3{1.4, 1.3, 1.1}, tgt};
  Complex legs = reconstruct_G_path(C, geom::zero_vector(), V, ps, path);
  CHECK(std::abs(direct - legs) <= 1e-9);

  // Counterexample: V = x^3 y under a constant diagonal KT is curl-obstructed.
  KtParams a3;
  a3[3] = 1;
  ParamSet none;
  Expr bad = parse("x^3*y", {});
  auto Cb = geom::general_kt(a3);
  Complex d2 = reconstruct_G(Cb, geom::zero_vector(), bad, none, base, tgt);
  Complex l2 = reconstruct_G_path(Cb, geom::zero_vector(), bad, none, path);
  CHECK(std::abs(d2 - l2) > 1e-3);
}
