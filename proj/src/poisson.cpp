#include "symfi/poisson.hpp"

#include <nlohmann/json.hpp>

namespace symfi::poisson {

using ex::Expr;

Expr bracket(const Expr& A, const Expr& B) {
  std::vector<Expr> terms;
  for (int a = 0; a < 3; ++a) {
    int q = 1 + a, v = 4 + a;
    terms.push_back(A.diff(q) * B.diff(v));
    terms.push_back(-(A.diff(v) * B.diff(q)));
  }
  return Expr::sum(std::move(terms));
}

Expr hamiltonian(const Expr& V) {
  Expr vx = Expr::variable(4), vy = Expr::variable(5), vz = Expr::variable(6);
  return Expr::constant(0.5) * (vx * vx + vy * vy + vz * vz) + V;
}

Expr total_time_derivative(const Expr& I, const Expr& V) {
  std::vector<Expr> terms{I.diff(0)};
  for (int a = 0; a < 3; ++a) {
    int q = 1 + a, v = 4 + a;
    terms.push_back(I.diff(q) * Expr::variable(v));
    terms.push_back(-(I.diff(v) * V.diff(q)));
  }
  return Expr::sum(std::move(terms));
}

double max_abs_on(const Expr& e, const ParamSet& params,
                  std::span<const Point7> samples, double den_tol) {
  ex::Tape tape = ex::Tape::compile(e, params.names);
  Complex out;
  double worst = 0.0;
  long used = 0, skipped = 0;
  for (const Point7& p : samples) {
    auto st = tape.eval_ld(std::span<const Complex>(p.data(), 7), params.values,
                           std::span<Complex>(&out, 1));
    if (st.domain_error || st.min_den < den_tol ||
        !std::isfinite(out.real()) || !std::isfinite(out.imag())) {
      ++skipped;
      continue;
    }
    ++used;
    worst = std::max(worst, std::abs(out));
  }
  if (used == 0 || skipped * 5 > (long)samples.size())
    throw SampleError("too many singular samples in residual evaluation");
  return worst;
}

InvolutionResult in_involution(std::span<const Expr> set, const ParamSet& params,
                               std::span<const Point7> samples, double tol) {
  const std::size_t n = set.size();
  InvolutionResult r;
  r.residual.assign(n, std::vector<double>(n, 0.0));
  r.involutive = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double m = max_abs_on(bracket(set[i], set[j]), params, samples);
      r.residual[i][j] = r.residual[j][i] = m;
      if (m > tol) r.involutive = false;
    }
  return r;
}

std::string involution_to_json(const InvolutionResult& r) {
  nlohmann::json j;
  j["involutive"] = r.involutive;
  j["pairwise_max"] = r.residual;
  return j.dump();
}

}  // namespace symfi::poisson
