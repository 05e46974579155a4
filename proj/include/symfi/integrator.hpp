#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "symfi/sampling.hpp"

namespace symfi::dyn {

using ex::Expr;

/// Extended-precision state component. Quantities like e^(lambda t) times a
/// decaying mode amplify state roundoff by e^(2 lambda t); 80-bit storage
/// keeps their drift below the 1e-8 budget over t in [0, 10].
using CState = std::complex<long double>;

struct State {
  double t = 0.0;
  std::array<CState, 3> q{};
  std::array<CState, 3> v{};
};

struct Trajectory {
  std::vector<State> states;  // stored at store_stride intervals plus endpoints
  double h = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::size_t steps_taken = 0;
};

struct IntegrateOptions {
  double h = 1e-3;
  double den_guard = 1e-4;    // abort when a denominator gets this small
  double cut_guard = 1e-3;    // abort on branch-cut approach
  double state_cap = 50;      // abort before cancellations outgrow precision
  double stage_tol = 0.5;     // stage disagreement ~h*L; catastrophic only
  int store_stride = 10;
};

/// Acceleration -grad V at a state; throws EvalError on singular evaluation.
std::array<Complex, 3> acceleration(const Expr& V, const ParamSet& params,
                                    const State& s);

/// Classic fixed-step RK4 for qdot = v, vdot = -grad V. Complex state
/// components are supported (complex potentials drive real initial data off
/// the real slice; that is fine). On singularity approach the integration
/// aborts and the trajectory up to the last good state is returned.
Trajectory integrate(const Expr& V, const ParamSet& params, const State& s0,
                     double t_end, const IntegrateOptions& opts = {});

/// max over stored states of |I(state) - I(initial)| / max(1, |I(initial)|).
double drift(const Expr& I, const ParamSet& params, const Trajectory& traj);

std::string trajectory_csv(const Trajectory& traj);

}  // namespace symfi::dyn
