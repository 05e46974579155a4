#pragma once

#include <array>
#include <complex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symfi/compiled.hpp"
#include "symfi/expr.hpp"

namespace symfi {

using Complex = std::complex<double>;

/// Named parameter values, in a stable order shared with compiled tapes.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Complex> values;

  void set(const std::string& name, Complex v) {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) {
        values[k] = v;
        return;
      }
    names.push_back(name);
    values.push_back(v);
  }
  const Complex* find(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return &values[k];
    return nullptr;
  }
  ex::ParseContext parse_context() const {
    ex::ParseContext ctx;
    for (const auto& n : names) ctx.params.insert(n);
    return ctx;
  }
  ex::Binding binding(std::span<const Complex> vars7 = {}) const {
    ex::Binding b;
    for (std::size_t k = 0; k < names.size(); ++k) b.set(names[k], values[k]);
    for (std::size_t k = 0; k < vars7.size(); ++k)
      b.set(ex::kVarNames[k], vars7[k]);
    return b;
  }
};

/// Deterministic uniform doubles from mt19937_64 bits; identical streams
/// across platforms for a given seed.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed = 42) : gen(seed) {}
  double unit() { return (gen() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
};

/// Positive-octant sampling box; keeps clear of branch cuts and poles.
struct SampleBox {
  double pos_lo = 0.3, pos_hi = 1.7;
  double vel_lo = -1.0, vel_hi = 1.0;
  double t_lo = 0.0, t_hi = 2.0;
};

using Point7 = std::array<Complex, 7>;  // t x y z vx vy vz

inline Point7 draw_point(Rng& rng, const SampleBox& box) {
  Point7 p;
  p[0] = rng.uniform(box.t_lo, box.t_hi);
  for (int k = 1; k <= 3; ++k) p[k] = rng.uniform(box.pos_lo, box.pos_hi);
  for (int k = 4; k <= 6; ++k) p[k] = rng.uniform(box.vel_lo, box.vel_hi);
  return p;
}

struct SampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rejection-sample n regular points: every guard tape must evaluate with
/// all denominator magnitudes >= den_tol. Throws when more than 20% of the
/// draws get rejected.
std::vector<Point7> draw_regular(Rng& rng, const SampleBox& box, int n,
                                 std::span<const ex::Tape* const> guards,
                                 const ParamSet& params,
                                 double den_tol = 1e-3);

std::vector<Point7> draw_regular(Rng& rng, const SampleBox& box, int n,
                                 std::span<const ex::Expr> guard_exprs,
                                 const ParamSet& params,
                                 double den_tol = 1e-3);

}  // namespace symfi
