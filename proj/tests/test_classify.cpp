#include <doctest.h>

#include "symfi/classify.hpp"

using namespace symfi;
using namespace symfi::classify;
using ex::Expr;
using ex::parse;

namespace {

std::vector<Point7> pts(int n, std::uint64_t seed = 42) {
  Rng rng(seed);
  std::vector<Point7> out;
  for (int k = 0; k < n; ++k) out.push_back(draw_point(rng, SampleBox{}));
  return out;
}

}  // namespace

TEST_CASE("rank of the Note-5 five-FI set is 4, not 5") {
  ParamSet ps;
  ps.set("b", 2.0);
  ps.set("c", 3.0);
  auto ctx = ps.parse_context();
  Expr V = parse("c*x + (y - b*x)^2 + z^2", ctx);
  Expr H = poisson::hamiltonian(V);
  std::vector<Expr> fis{
      H,
      parse("vx + b*vy + c*t", ctx),
      parse("t*(vx + b*vy) - (x + b*y) + (c/2)*t^2", ctx),
      parse("(vx + b*vy)^2 + 2*c*(x + b*y)", ctx),
      parse("(1/2)*vz^2 + z^2", ctx),
  };
  auto sample = pts(40);
  CHECK(jacobian_rank(fis, ps, sample) == 4);
  // Any four of {H, I3, I4, I1} or {H, I3, I4, I2} are independent.
  std::vector<Expr> four{fis[0], fis[3], fis[4], fis[1]};
  CHECK(jacobian_rank(four, ps, sample) == 4);
}

TEST_CASE("rank of the six exponential LFIs is 6") {
  // V = -k r^2 with k = 1/2: I_{a,+-} = e^{+-t}(v_a -+ q_a).
  ParamSet ps;
  std::vector<Expr> fis;
  for (const char* a : {"x", "y", "z"}) {
    std::string v = std::string("v") + a;
    fis.push_back(parse("exp(t)*(" + v + " - " + a + ")", {}));
    fis.push_back(parse("exp(-t)*(" + v + " + " + a + ")", {}));
  }
  auto sample = pts(40, 7);
  CHECK(jacobian_rank(fis, ps, sample) == 6);
}

TEST_CASE("duplicated FI list has rank 1") {
  ParamSet ps;
  Expr H = poisson::hamiltonian(parse("r^2/2", {}));
  std::vector<Expr> fis{H, H};
  CHECK(jacobian_rank(fis, ps, pts(20, 9)) == 1);
}

TEST_CASE("rank is invariant under invertible recombination") {
  ParamSet ps;
  Expr V = parse("x^2 + y^2 + z^2", {});
  Expr I1 = parse("vx^2/2 + x^2", {});
  Expr I2 = parse("vy^2/2 + y^2", {});
  Expr I3 = parse("vz^2/2 + z^2", {});
  auto sample = pts(30, 11);
  std::vector<Expr> plain{I1, I2, I3};
  std::vector<Expr> mixed{I1, I2 + Expr::constant(3.0) * I1, I3};
  CHECK(jacobian_rank(plain, ps, sample) ==
        jacobian_rank(mixed, ps, sample));
}

TEST_CASE("rank never exceeds 7") {
  ParamSet ps;
  std::vector<Expr> fis;
  const char* texts[] = {"x", "y", "z", "vx", "vy", "vz", "t + x*vx",
                         "x*y", "vz^2 + x"};
  for (const char* s : texts) fis.push_back(parse(s, {}));
  CHECK(jacobian_rank(fis, ps, pts(30, 13)) <= 7);
  CHECK(jacobian_rank(fis, ps, pts(30, 13)) == 7);
}

TEST_CASE("classify_set verdicts") {
  ParamSet ps;
  auto sample = pts(60, 17);

  SUBCASE("separable potential with three energies is integrable") {
    Expr V = parse("x^4 + y^4 + z^4", {});
    std::vector<Expr> fis{poisson::hamiltonian(V),
                          parse("vx^2/2 + x^4", {}),
                          parse("vy^2/2 + y^4", {})};
    auto c = classify_set(fis, ps, sample);
    CHECK(c.verdict == Verdict::Integrable);
    CHECK(c.involutive_triple.size() == 3);
  }

  SUBCASE("only H is not established") {
    std::vector<Expr> fis{poisson::hamiltonian(parse("r^2/2", {}))};
    auto c = classify_set(fis, ps, sample);
    CHECK(c.verdict == Verdict::NotEstablished);
  }

  SUBCASE("independent but non-commuting set is not established") {
    ParamSet pk;
    pk.set("k1", 2.0);
    pk.set("k2", 3.0);
    pk.set("k3", 5.0);
    auto ctx = pk.parse_context();
    Expr V = parse("k1/x^2 + k2/y^2 + k3/z^2", ctx);
    std::vector<Expr> fis{
        poisson::hamiltonian(V),
        parse("(1/2)*M1^2 + k2*z^2/y^2 + k3*y^2/z^2", ctx),
        parse("(1/2)*M2^2 + k1*z^2/x^2 + k3*x^2/z^2", ctx),
        parse("(1/2)*M3^2 + k1*y^2/x^2 + k2*x^2/y^2", ctx),
    };
    auto c = classify_set(fis, pk, sample);
    CHECK(c.verdict == Verdict::NotEstablished);
    CHECK(c.rank_all == 4);
  }

  SUBCASE("oscillator with walls is maximally superintegrable") {
    ParamSet pk;
    pk.set("k", 1.0);
    pk.set("b", 1.0);
    pk.set("c", 1.0);
    auto ctx = pk.parse_context();
    Expr V = parse("(k/2)*R^2 + b/x^2 + c/y^2 + z^2", ctx);
    std::vector<Expr> fis{
        poisson::hamiltonian(V),
        parse("M3^2 + 2*b*y^2/x^2 + 2*c*x^2/y^2", ctx),
        parse("(1/2)*vz^2 + z^2", ctx),
        parse("(1/2)*vx^2 + (k/2)*x^2 + b/x^2", ctx),
        parse("(1/2)*vy^2 + (k/2)*y^2 + c/y^2", ctx),
        // k = -lam^2/4 with lam = 2i: time-dependent exponential QFIs.
        parse("exp(2*i*t)*(-vx^2 + 2*i*x*vx + x^2 - 2*b/x^2)", ctx),
        parse("exp(2*i*t)*(-vy^2 + 2*i*y*vy + y^2 - 2*c/y^2)", ctx),
    };
    auto c = classify_set(fis, pk, sample);
    CHECK(c.verdict == Verdict::MaximallySuperintegrable);
    CHECK(c.rank_all >= 5);
  }

  SUBCASE("separable triple plus one extra is minimal") {
    ParamSet pk;
    pk.set("k", 2.0);
    auto ctx = pk.parse_context();
    // V = k/(y+1)^2 + x^4 + z^4: three energies plus a t^2-weighted QFI.
    Expr V = parse("x^4 + k/(y + 1)^2 + z^4", ctx);
    std::vector<Expr> fis{
        poisson::hamiltonian(V),
        parse("vx^2/2 + x^4", ctx),
        parse("vy^2/2 + k/(y + 1)^2", ctx),
        parse("vz^2/2 + z^4", ctx),
        parse("-(t^2/2)*vy^2 + t*(y + 1)*vy - t^2*k/(y + 1)^2 - y^2/2 - y",
              ctx),
    };
    auto c = classify_set(fis, pk, sample);
    CHECK(c.verdict == Verdict::MinimallySuperintegrable);
    CHECK(c.rank_all == 4);
  }
}

TEST_CASE("classify never reports integrable without a witness") {
  ParamSet ps;
  auto sample = pts(40, 23);
  Expr V = parse("x^2*y^2*z^2", {});
  std::vector<Expr> fis{poisson::hamiltonian(V), parse("M3 + x", {})};
  auto c = classify_set(fis, ps, sample);
  CHECK(c.verdict == Verdict::NotEstablished);
  CHECK(c.involutive_triple.empty());
}

TEST_CASE("verify_relation") {
  ParamSet ps;
  ps.set("b", 2.0);
  ps.set("c", 3.0);
  auto ctx = ps.parse_context();
  auto sample = pts(200, 29);
  // Note-5 dependency: I1^2 = I3 + 2 c I2.
  Expr I1 = parse("vx + b*vy + c*t", ctx);
  Expr I2 = parse("t*(vx + b*vy) - (x + b*y) + (c/2)*t^2", ctx);
  Expr I3 = parse("(vx + b*vy)^2 + 2*c*(x + b*y)", ctx);
  CHECK(verify_relation(I1 * I1, I3 + Expr::constant(2.0) * parse("c", ctx) * I2,
                        ps, sample, 1e-10));
  // 4 I2 I3 = I4^2 - k^2 M3^2 for the planar inverted oscillator.
  ParamSet pk;
  pk.set("k", 2.0);
  auto kctx = pk.parse_context();
  Expr J2 = parse("(1/2)*vx^2 - (1/2)*k^2*x^2", kctx);
  Expr J3 = parse("(1/2)*vy^2 - (1/2)*k^2*y^2", kctx);
  Expr J4 = parse("vx*vy - k^2*x*y", kctx);
  CHECK(verify_relation(Expr::constant(4.0) * J2 * J3,
                        J4 * J4 - parse("k^2*M3^2", kctx), pk, sample, 1e-10));
  // H vs H + 1 is false.
  Expr H = poisson::hamiltonian(parse("r^2/2", {}));
  CHECK_FALSE(verify_relation(H, H + Expr::constant(1.0), ps, sample, 1e-10));
}
