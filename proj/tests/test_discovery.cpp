#include <doctest.h>

#include "oracle_kt.hpp"
#include "symfi/catalog.hpp"
#include "symfi/discovery.hpp"
#include "symfi/poisson.hpp"

using namespace symfi;
namespace dsc = symfi::discover;
using dsc::assemble_system;
using dsc::nullspace;
using dsc::projection_residual;
using dsc::DiscoverOptions;
using ex::Expr;
using ex::parse;

namespace {

std::vector<Point7> pts(int n, std::uint64_t seed = 42) {
  Rng rng(seed);
  std::vector<Point7> out;
  for (int k = 0; k < n; ++k) out.push_back(draw_point(rng, SampleBox{}));
  return out;
}

ParamSet k235() {
  ParamSet ps;
  ps.set("k1", 2.0);
  ps.set("k2", 3.0);
  ps.set("k3", 5.0);
  return ps;
}

oracle::Poly inverse_square_poly(double k1, double k2, double k3) {
  oracle::Poly V;
  V.add({-2, 0, 0}, k1);
  V.add({0, -2, 0}, k2);
  V.add({0, 0, -2}, k3);
  return V;
}

}  // namespace

TEST_CASE("oracle reference dimensions") {
  // Frozen from the coefficient-matching oracle; the discovery path below
  // must reproduce them.
  CHECK(oracle::nullspace_dim(oracle::Poly{}) == 20);
  oracle::Poly vosc;
  vosc.add({2, 0, 0}, 0.5);
  vosc.add({0, 2, 0}, 0.5);
  vosc.add({0, 0, 2}, 0.5);
  CHECK(oracle::nullspace_dim(vosc) == 12);
  CHECK(oracle::nullspace_dim(inverse_square_poly(2, 3, 5)) == 6);
  oracle::Poly vcubic;
  vcubic.add({3, 0, 0}, 1);
  vcubic.add({0, 3, 0}, 1);
  vcubic.add({0, 0, 3}, 1);
  CHECK(oracle::nullspace_dim(vcubic) == 3);
}

TEST_CASE("assemble_system: V = 0 gives the zero matrix") {
  ParamSet ps;
  auto sample = pts(60);
  auto M = assemble_system(Expr(), ps, sample);
  CHECK(M.rows() >= 3 * 40);
  CHECK(M.cols() == 20);
  CHECK(M.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(nullspace(M).dim() == 20);
}

TEST_CASE("assemble_system errors out with too few samples") {
  ParamSet ps;
  auto sample = pts(10);
  CHECK_THROWS_AS(assemble_system(Expr(), ps, sample), SampleError);
}

TEST_CASE("nullspace basics") {
  Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(40, 20);
  CHECK(nullspace(Z).dim() == 20);

  Eigen::MatrixXcd F = Eigen::MatrixXcd::Random(40, 20);
  CHECK(nullspace(F).dim() == 0);
}

TEST_CASE("nullspace recovers a constructed kernel") {
  // M = B S with S chosen to annihilate a known 3-dim subspace K.
  Rng rng(7);
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(20, 3);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 20; ++r)
      K(r, c) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(K);
  Eigen::MatrixXcd Q = qr.householderQ();  // 20 x 20 unitary
  Eigen::MatrixXcd S = Q.rightCols(17).adjoint();  // 17 x 20, kernel = span K
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Random(60, 17);
  auto ns = nullspace(B * S);
  REQUIRE(ns.dim() == 3);
  for (int c = 0; c < 3; ++c) {
    geom::KtParams v;
    for (int r = 0; r < 20; ++r) v.a[r] = K(r, c);
    CHECK(projection_residual(ns, v) < 1e-10);
  }
}

TEST_CASE("discover: inverse-square family") {
  ParamSet ps = k235();
  Expr V = parse("k1/x^2 + k2/y^2 + k3/z^2", ps.parse_context());
  DiscoverOptions opts;
  auto res = dsc::discover(V, ps, opts);

  int want = oracle::nullspace_dim(inverse_square_poly(2, 3, 5));
  CHECK(res.space.dim() == want);
  CHECK(res.space.dim() == 6);
  // Every emitted candidate re-verified on fresh samples.
  CHECK((int)res.candidates.size() == res.space.dim());
  for (const auto& c : res.candidates) {
    CHECK(c.verified);
    CHECK(c.verify_residual <= opts.verify_tol);
    CHECK(c.g_fit.ok);  // rational potentials fit in the dictionary
    CHECK(c.path_agreement <= 1e-9);
  }
  // The claimed directions are inside the computed space: the three
  // angular-momentum tensors plus the H-equivalent diagonal.
  for (int slot : {1, 6, 7}) {
    geom::KtParams claimed;
    claimed[slot] = 1;
    CHECK(projection_residual(res.space, claimed) <= 1e-8);
  }
  geom::KtParams diag;
  diag[3] = diag[13] = diag[9] = 0.5;
  CHECK(projection_residual(res.space, diag) <= 1e-8);

  // Sample-count stability: doubling the samples leaves the dimension alone.
  DiscoverOptions more = opts;
  more.samples = 160;
  CHECK(dsc::discover(V, ps, more).space.dim() == res.space.dim());
}

TEST_CASE("discover: adding the oscillator term keeps the same count") {
  ParamSet ps = k235();
  ps.set("k", 7.0);
  Expr V = parse("k*r^2 + k1/x^2 + k2/y^2 + k3/z^2", ps.parse_context());
  auto res = dsc::discover(V, ps);
  oracle::Poly VO = inverse_square_poly(2, 3, 5);
  VO.add({2, 0, 0}, 7);
  VO.add({0, 2, 0}, 7);
  VO.add({0, 0, 2}, 7);
  CHECK(res.space.dim() == oracle::nullspace_dim(VO));
  CHECK(res.space.dim() == 6);
  for (const auto& c : res.candidates) CHECK(c.verified);
}

TEST_CASE("discover: cubic potential keeps only the separable directions") {
  ParamSet ps;
  Expr V = parse("x^3 + y^3 + z^3", {});
  auto res = dsc::discover(V, ps);
  CHECK(res.space.dim() == 3);
  geom::KtParams sep;
  sep[3] = 1;
  CHECK(projection_residual(res.space, sep) <= 1e-8);
  for (const auto& c : res.candidates) CHECK(c.verified);
}

TEST_CASE("discover: free potential yields the whole twenty-dim family") {
  ParamSet ps;
  auto res = dsc::discover(Expr(), ps);
  CHECK(res.space.dim() == 20);
  CHECK(res.candidates.size() == 20);
  for (const auto& c : res.candidates) {
    CHECK(c.verified);
    CHECK(c.verify_residual < 1e-12);
  }
}

TEST_CASE("discover: isotropic oscillator has the twelve-dim space") {
  ParamSet ps;
  Expr V = parse("r^2/2", {});
  auto res = dsc::discover(V, ps);
  CHECK(res.space.dim() == 12);
  for (const auto& c : res.candidates) CHECK(c.verified);
  // The Fradkin direction and an angular-momentum square belong to it...
  geom::KtParams fradkin;
  fradkin[3] = 1;
  CHECK(projection_residual(res.space, fradkin) <= 1e-8);
  geom::KtParams m3;
  m3[6] = 1;
  CHECK(projection_residual(res.space, m3) <= 1e-8);
  // ...while a dilation-type direction does not.
  geom::KtParams dil;
  dil[5] = 1;  // C11 = y, ...
  CHECK(projection_residual(res.space, dil) > 1e-2);
}

TEST_CASE("discovery result serializes") {
  ParamSet ps;
  auto res = dsc::discover(parse("x^3 + y^3 + z^3", {}), ps);
  auto text = res.to_json();
  CHECK(text.find("\"nullspace_dim\":3") != std::string::npos);
  CHECK(text.find("\"candidates\"") != std::string::npos);
}

TEST_CASE("sample-count stability across the whole corpus") {
  // Doubling the sample count must not change any nullspace dimension.
  auto entries =
      symfi::cat::load(std::string(SYMFI_DATA_DIR) + "/catalog/corpus.json");
  int swept = 0;
  for (const auto& e : entries) {
    auto inst = symfi::cat::instantiate(e, e.functions);
    dsc::DiscoverOptions lo, hi;
    lo.samples = 80;
    hi.samples = 160;
    lo.verify_samples = hi.verify_samples = 1;  // dimensions only
    lo.grid_n = hi.grid_n = 1;
    int dim_lo, dim_hi;
    try {
      Rng rlo(7), rhi(8);
      std::vector<Expr> guard{inst.potential};
      auto slo = draw_regular(rlo, SampleBox{}, lo.samples, guard, e.params);
      dim_lo = dsc::nullspace(
                   dsc::assemble_system(inst.potential, e.params, slo))
                   .dim();
      auto shi = draw_regular(rhi, SampleBox{}, hi.samples, guard, e.params);
      dim_hi = dsc::nullspace(
                   dsc::assemble_system(inst.potential, e.params, shi))
                   .dim();
    } catch (const SampleError&) {
      continue;  // too singular to sample under this instantiation
    }
    CAPTURE(e.id);
    CHECK(dim_lo == dim_hi);
    ++swept;
  }
  CHECK(swept >= 80);
}
