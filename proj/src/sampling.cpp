#include "symfi/sampling.hpp"

namespace symfi {

std::vector<Point7> draw_regular(Rng& rng, const SampleBox& box, int n,
                                 std::span<const ex::Tape* const> guards,
                                 const ParamSet& params, double den_tol) {
  std::vector<Point7> out;
  out.reserve(n);
  std::vector<Complex> scratch;
  long attempts = 0, skipped = 0;
  const long max_attempts = 50L * n + 200;
  while ((int)out.size() < n) {
    if (attempts >= max_attempts)
      throw SampleError("could not find enough regular sample points");
    ++attempts;
    Point7 p = draw_point(rng, box);
    bool ok = true;
    for (const ex::Tape* t : guards) {
      scratch.assign(t->num_outputs(), Complex{});
      auto st = t->eval_ld(std::span<const Complex>(p.data(), 7), params.values,
                           scratch);
      if (st.domain_error || st.min_den < den_tol) {
        ok = false;
        break;
      }
      for (const Complex& v : scratch)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) ok = false;
      if (!ok) break;
    }
    if (ok)
      out.push_back(p);
    else
      ++skipped;
  }
  if (skipped * 5 > attempts)
    throw SampleError("more than 20% of sample draws were singular");
  return out;
}

std::vector<Point7> draw_regular(Rng& rng, const SampleBox& box, int n,
                                 std::span<const ex::Expr> guard_exprs,
                                 const ParamSet& params, double den_tol) {
  std::vector<ex::Tape> tapes;
  tapes.reserve(guard_exprs.size());
  std::vector<const ex::Tape*> ptrs;
  for (const auto& e : guard_exprs)
    tapes.push_back(ex::Tape::compile(e, params.names));
  for (const auto& t : tapes) ptrs.push_back(&t);
  return draw_regular(rng, box, n, ptrs, params, den_tol);
}

}  // namespace symfi
