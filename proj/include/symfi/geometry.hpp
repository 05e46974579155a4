#pragma once

#include <array>
#include <optional>
#include <span>

#include "symfi/sampling.hpp"

namespace symfi::geom {

using ex::Expr;

/// Killing-vector coefficients b1..b6.
struct KvParams {
  std::array<double, 6> b{};
};

/// The 20 coefficients of the general second-order Killing tensor on E^3.
/// Complex values are allowed (several catalog cases force imaginary ones).
struct KtParams {
  std::array<Complex, 20> a{};
  Complex& operator[](int k) { return a[k - 1]; }  // 1-based, as in the tables
  const Complex& operator[](int k) const { return a[k - 1]; }
};

struct VectorField {
  std::array<Expr, 3> comp;
  const Expr& operator[](int k) const { return comp[k]; }
};

/// Symmetric 3x3 tensor field; upper triangle stored.
struct SymTensorField {
  Expr c11, c12, c13, c22, c23, c33;
  const Expr& at(int i, int j) const;
};

VectorField zero_vector();

VectorField killing_vector(const KvParams& p);

/// General 20-parameter KT with the coefficients given as expressions
/// (constants for evaluation, parameters "a1".."a20" for linear assembly).
SymTensorField general_kt(const std::array<Expr, 20>& a);
SymTensorField general_kt(const KtParams& p);
std::array<Expr, 20> kt_symbol_array();  // parameters a1..a20

/// Vector generating the reducible KT L_(a;b); the six parameters
/// a1,a4,a6,a7,a10,a14 only contribute Killing-vector parts and drop out
/// of the generated tensor.
VectorField reducible_vector(const std::array<Expr, 20>& a);
VectorField reducible_vector(const KtParams& p);

/// Flat-space symmetrized gradient L_(a;b) = (d_a L_b + d_b L_a)/2.
SymTensorField sym_gradient(const VectorField& L);

SymTensorField add(const SymTensorField& A, const SymTensorField& B);
SymTensorField scale(const SymTensorField& A, const Expr& s);

/// Sample-based Killing-equation check: fully symmetrized gradient of C
/// vanishes at every sample within tol. The components of any admissible C
/// are polynomials of degree <= 2, so generic sampling in excess of the
/// degree bound is a sound polynomial-identity test.
bool is_killing_tensor(const SymTensorField& C, std::span<const Point7> samples,
                       const ParamSet& params, double tol,
                       double* max_residual = nullptr);

// JSON wire format: flat object keyed "a1".."a20" / "b1".."b6",
// complex entries as [re, im].
std::string kt_to_json(const KtParams& p);
KtParams kt_from_json(const std::string& text);
std::string kv_to_json(const KvParams& p);
KvParams kv_from_json(const std::string& text);

}  // namespace symfi::geom
