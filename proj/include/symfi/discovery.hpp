#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "symfi/geometry.hpp"
#include "symfi/qfi.hpp"

namespace symfi::discover {

using ex::Expr;
using geom::KtParams;

/// Rows: the three integrability conditions evaluated at each regular
/// sample, as linear functionals of the twenty KT coefficients. The
/// conditions are linear and homogeneous in the coefficients for fixed V.
Eigen::MatrixXcd assemble_system(const Expr& V, const ParamSet& params,
                                 std::span<const Point7> samples);

struct Nullspace {
  Eigen::MatrixXcd basis;  // 20 x dim, orthonormal columns
  Eigen::VectorXd singular_values;
  int dim() const { return (int)basis.cols(); }
};

Nullspace nullspace(const Eigen::MatrixXcd& M, double rel_tol = 1e-8);

struct GFit {
  bool ok = false;
  Expr expression;         // when ok
  double residual = 0.0;   // max |sampled - fitted|
};

struct Candidate {
  KtParams kt;
  GFit g_fit;
  std::vector<std::array<double, 3>> g_grid;  // sample locations
  std::vector<Complex> g_values;              // line-integral values
  double verify_residual = 0.0;  // max |dI/dt| on fresh samples
  double path_agreement = 0.0;   // two-path G disagreement
  bool verified = false;
};

struct DiscoverOptions {
  int samples = 80;
  double nullspace_tol = 1e-8;
  int verify_samples = 200;
  double verify_tol = 1e-9;
  int grid_n = 5;
  std::uint64_t seed = 42;
};

struct DiscoveryResult {
  Nullspace space;
  std::vector<Candidate> candidates;  // only verified ones
  int samples_used = 0;
  std::string to_json() const;
};

DiscoveryResult discover(const Expr& V, const ParamSet& params,
                         const DiscoverOptions& opts = {});

/// Norm of the component of `claimed` orthogonal to the computed nullspace,
/// relative to |claimed|; membership test for known KT directions.
double projection_residual(const Nullspace& space, const KtParams& claimed);

/// Dictionary for sparse G fits: monomials up to total degree 4 plus
/// inverse powers per axis and products with numerators of degree <= 2.
std::vector<std::array<int, 3>> g_dictionary();

}  // namespace symfi::discover
