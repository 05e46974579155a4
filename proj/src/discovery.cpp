#include "symfi/discovery.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "symfi/poisson.hpp"

namespace symfi::discover {

using json = nlohmann::json;

Eigen::MatrixXcd assemble_system(const Expr& V, const ParamSet& params,
                                 std::span<const Point7> samples) {
  auto conds = qfi::i11_integrability_conditions(geom::kt_symbol_array(), V);
  ParamSet full = params;
  for (int k = 1; k <= 20; ++k) full.set("a" + std::to_string(k), 0.0);
  ex::Tape tape = ex::Tape::compile(
      std::span<const Expr>(conds.data(), 3), full.names);
  const std::size_t na = full.names.size();

  std::vector<Eigen::Matrix<Complex, 3, 20>> blocks;
  std::vector<Complex> pv = full.values;
  Complex out[3];
  int used = 0;
  for (const Point7& p : samples) {
    Eigen::Matrix<Complex, 3, 20> blk;
    bool ok = true;
    for (int k = 0; k < 20 && ok; ++k) {
      for (std::size_t q = na - 20; q < na; ++q) pv[q] = 0.0;
      pv[na - 20 + k] = 1.0;
      auto st = tape.eval_ld(std::span<const Complex>(p.data(), 7), pv,
                             std::span<Complex>(out, 3));
      if (st.domain_error || st.min_den < 1e-9) ok = false;
      for (int r = 0; r < 3; ++r) {
        if (!std::isfinite(out[r].real()) || !std::isfinite(out[r].imag()))
          ok = false;
        blk(r, k) = out[r];
      }
    }
    if (!ok) continue;
    blocks.push_back(blk);
    ++used;
  }
  if (used < 40)
    throw SampleError("fewer than 40 usable samples in assemble_system");
  Eigen::MatrixXcd M(3 * used, 20);
  for (int b = 0; b < used; ++b) M.block(3 * b, 0, 3, 20) = blocks[b];
  return M;
}

Nullspace nullspace(const Eigen::MatrixXcd& M, double rel_tol) {
  Nullspace out;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  out.singular_values = s;
  double smax = s.size() ? s(0) : 0.0;
  int dim = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) <= rel_tol * smax) ++dim;
  dim += 20 - (int)s.size();  // columns beyond the row count are free
  if (smax == 0.0) dim = 20;
  out.basis = svd.matrixV().rightCols(dim);
  return out;
}

std::vector<std::array<int, 3>> g_dictionary() {
  std::vector<std::array<int, 3>> terms;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j)
      for (int k = 0; i + j + k <= 4; ++k) terms.push_back({i, j, k});
  // One axis inverted, numerator of degree <= 2 on the others.
  for (int axis = 0; axis < 3; ++axis)
    for (int p = 1; p <= 2; ++p)
      for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j) {
          std::array<int, 3> e{};
          e[axis] = -p;
          int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
          e[o1] = i;
          e[o2] = j;
          terms.push_back(e);
        }
  return terms;
}

namespace {

Expr term_expr(const std::array<int, 3>& e) {
  std::vector<Expr> fs;
  for (int axis = 0; axis < 3; ++axis)
    if (e[axis] != 0)
      fs.push_back(Expr::power(Expr::variable(1 + axis), e[axis]));
  if (fs.empty()) return Expr::constant(1.0);
  return Expr::product(std::move(fs));
}

GFit fit_g(const std::vector<std::array<double, 3>>& pts,
           const std::vector<Complex>& vals) {
  static const auto dict = g_dictionary();
  const int n = (int)pts.size(), m = (int)dict.size();
  Eigen::MatrixXcd A(n, m);
  Eigen::VectorXcd b(n);
  for (int r = 0; r < n; ++r) {
    b(r) = vals[r];
    for (int c = 0; c < m; ++c) {
      double v = 1.0;
      for (int axis = 0; axis < 3; ++axis)
        v *= std::pow(pts[r][axis], dict[c][axis]);
      A(r, c) = v;
    }
  }
  Eigen::VectorXcd coef = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                              .solve(b);
  // Hard threshold, then refit on the support.
  std::vector<int> support;
  for (int c = 0; c < m; ++c)
    if (std::abs(coef(c)) > 1e-8) support.push_back(c);
  GFit out;
  if (support.empty()) {
    out.ok = true;
    out.expression = Expr();
    double resid = 0.0;
    for (int r = 0; r < n; ++r) resid = std::max(resid, std::abs(vals[r]));
    out.residual = resid;
    out.ok = resid < 1e-7;
    return out;
  }
  Eigen::MatrixXcd As(n, (int)support.size());
  for (std::size_t c = 0; c < support.size(); ++c) As.col((Eigen::Index)c) = A.col(support[c]);
  Eigen::VectorXcd cs =
      As.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
  Eigen::VectorXcd resid = As * cs - b;
  out.residual = resid.cwiseAbs().maxCoeff();
  out.ok = out.residual < 1e-7;
  if (out.ok) {
    std::vector<Expr> terms;
    for (std::size_t c = 0; c < support.size(); ++c) {
      Complex v = cs((Eigen::Index)c);
      if (std::abs(v) < 1e-10) continue;
      terms.push_back(Expr::constant(v) * term_expr(dict[support[c]]));
    }
    out.expression = Expr::sum(std::move(terms));
  }
  return out;
}

}  // namespace

double projection_residual(const Nullspace& space, const KtParams& claimed) {
  Eigen::VectorXcd v(20);
  for (int k = 0; k < 20; ++k) v(k) = claimed.a[k];
  double norm = v.norm();
  if (norm == 0.0) return 0.0;
  Eigen::VectorXcd proj = space.basis * (space.basis.adjoint() * v);
  return (v - proj).norm() / norm;
}

DiscoveryResult discover(const Expr& V, const ParamSet& params,
                         const DiscoverOptions& opts) {
  DiscoveryResult out;
  Rng rng(opts.seed);
  SampleBox box;
  // Regularity guards: the potential and its gradient. The assembled
  // conditions stack quotient derivatives whose denominators are high
  // powers; those are handled by the evaluation-stage singularity floor,
  // not by sample rejection.
  std::vector<Expr> guards{V, V.diff(1), V.diff(2), V.diff(3)};
  auto samples = draw_regular(rng, box, opts.samples, guards, params);
  Eigen::MatrixXcd M = assemble_system(V, params, samples);
  out.samples_used = (int)M.rows() / 3;
  out.space = nullspace(M, opts.nullspace_tol);

  // Fresh samples, not used in assembly.
  auto fresh = draw_regular(rng, box, opts.verify_samples, guards, params);

  for (int c = 0; c < out.space.dim(); ++c) {
    Candidate cand;
    for (int k = 0; k < 20; ++k) cand.kt.a[k] = out.space.basis(k, c);
    geom::SymTensorField C = geom::general_kt(cand.kt);
    geom::VectorField L = geom::zero_vector();

    // Sample G by line integration from a fixed base point. The sample
    // locations are random: tensor grids alias the inverse powers of the
    // dictionary (five abscissae per axis cannot separate seven exponents)
    // and admit grid-exact but function-wrong fits.
    qfi::Point3 base{0.7, 0.9, 1.1};
    const int n_g = opts.grid_n * opts.grid_n * opts.grid_n;
    Rng grng(opts.seed ^ 0x9e3779b97f4a7c15ull);
    bool g_ok = true;
    try {
      for (int i = 0; i < n_g; ++i) {
        qfi::Point3 p{grng.uniform(0.5, 1.5), grng.uniform(0.5, 1.5),
                      grng.uniform(0.5, 1.5)};
        cand.g_grid.push_back(p);
        cand.g_values.push_back(qfi::reconstruct_G(C, L, V, params, base, p));
      }
    } catch (const std::exception&) {
      g_ok = false;
    }
    if (!g_ok) continue;

    // Path independence certificate: straight vs two-leg path.
    qfi::Point3 tgt{1.4, 1.3, 0.6};
    Complex direct = qfi::reconstruct_G(C, L, V, params, base, tgt);
    std::array<qfi::Point3, 3> legs{base, qfi::Point3{tgt[0], base[1], base[2]},
                                    tgt};
    Complex two_leg = qfi::reconstruct_G_path(C, L, V, params, legs);
    cand.path_agreement = std::abs(direct - two_leg);

    cand.g_fit = fit_g(cand.g_grid, cand.g_values);
    if (cand.g_fit.ok) {
      Expr I = qfi::build_I11(C, L, cand.g_fit.expression, V).expression;
      Expr ddt = poisson::total_time_derivative(I, V);
      cand.verify_residual = poisson::max_abs_on(ddt, params, fresh);
      cand.verified = cand.verify_residual <= opts.verify_tol;
    } else {
      // No closed form in the dictionary; certify the conditions and the
      // path independence instead.
      std::array<Expr, 20> ac;
      for (int k = 0; k < 20; ++k) ac[k] = Expr::constant(cand.kt.a[k]);
      auto ints = qfi::i11_integrability_conditions(ac, V);
      double worst = 0.0;
      for (const Expr& e : ints)
        worst = std::max(worst, poisson::max_abs_on(e, params, fresh));
      cand.verify_residual = worst;
      cand.verified = worst <= opts.verify_tol &&
                      cand.path_agreement <= 1e-9;
    }
    if (cand.verified) out.candidates.push_back(std::move(cand));
  }
  return out;
}

std::string DiscoveryResult::to_json() const {
  json j;
  j["schema"] = 1;
  j["nullspace_dim"] = space.dim();
  j["samples_used"] = samples_used;
  std::vector<double> sv(space.singular_values.data(),
                         space.singular_values.data() +
                             space.singular_values.size());
  j["singular_values"] = sv;
  json cands = json::array();
  for (const auto& c : candidates) {
    json jc;
    jc["kt"] = json::parse(geom::kt_to_json(c.kt));
    jc["verified"] = c.verified;
    jc["ddt_residual"] = c.verify_residual;
    jc["path_agreement"] = c.path_agreement;
    if (c.g_fit.ok) {
      jc["g"] = c.g_fit.expression.str();
      jc["g_fit_residual"] = c.g_fit.residual;
    } else {
      jc["g"] = nullptr;
    }
    cands.push_back(std::move(jc));
  }
  j["candidates"] = std::move(cands);
  return j.dump();
}

}  // namespace symfi::discover
