#pragma once

#include <span>
#include <vector>

#include "symfi/sampling.hpp"

namespace symfi::poisson {

using ex::Expr;

/// Canonical bracket with momenta identified with velocities:
/// {A,B} = sum_a (dA/dq^a dB/dv_a - dA/dv_a dB/dq^a).
Expr bracket(const Expr& A, const Expr& B);

/// Hamiltonian H = v^2/2 + V.
Expr hamiltonian(const Expr& V);

/// dI/dt = dI/dt|_explicit + {I, H}; identically zero iff I is a first
/// integral of the flow of V.
Expr total_time_derivative(const Expr& I, const Expr& V);

struct InvolutionResult {
  bool involutive = false;
  std::vector<std::vector<double>> residual;  // pairwise max |{Ii,Ij}|
};

InvolutionResult in_involution(std::span<const Expr> set, const ParamSet& params,
                               std::span<const Point7> samples, double tol);

/// Max |e| over the regular samples; singular samples are skipped and
/// counted (>20% skips raises).
double max_abs_on(const Expr& e, const ParamSet& params,
                  std::span<const Point7> samples, double den_tol = 1e-3);

std::string involution_to_json(const InvolutionResult& r);

}  // namespace symfi::poisson
