#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symfi/geometry.hpp"
#include "symfi/sampling.hpp"

namespace symfi::qfi {

using ex::Expr;
using geom::KtParams;
using geom::SymTensorField;
using geom::VectorField;

enum class Family { I10, I11, I20, I3, LFI, Generic };

const char* family_name(Family f);
std::optional<Family> family_from_name(std::string_view s);

struct FirstIntegral {
  Expr expression;  // in (t, x, y, z, vx, vy, vz)
  Family family = Family::Generic;
  Complex lambda{};  // stored for Family::I3
  std::string note;
};

struct ConditionResidual {
  std::string name;
  double max_residual = 0.0;
};

struct ConditionReport {
  std::vector<ConditionResidual> conditions;
  int samples_used = 0;
  int samples_skipped = 0;
  double tol = 0.0;
  bool pass = false;
  std::string to_json() const;
};

/// (-t^2/2 L_(a;b) + C_ab) v^a v^b + t L_a v^a + t^2/2 L_a V^,a + G
FirstIntegral build_I11(const SymTensorField& C, const VectorField& L,
                        const Expr& G, const Expr& V);

/// -t L_(a;b) v^a v^b + L_a v^a + t L_a V^,a
FirstIntegral build_I20(const VectorField& L, const Expr& V);

/// e^(lambda t) (-L_(a;b) v^a v^b + lambda L_a v^a + L_a V^,a); lambda != 0.
FirstIntegral build_I3(const VectorField& L, Complex lambda, const Expr& V);

/// The three integrability conditions of the autonomous QFI system, linear
/// and homogeneous in the twenty KT coefficients (given as expressions so
/// they can be symbols for assembly or constants for evaluation).
std::array<Expr, 3> i11_integrability_conditions(const std::array<Expr, 20>& a,
                                                 const Expr& V);

/// First-principles counterpart of the above: the curl components of
/// W_a = 2 C_ab V^,b - L_a. With L = 0 these match the closed-form
/// conditions up to a factor of -2.
std::array<Expr, 3> curl_of_gradient_candidate(const SymTensorField& C,
                                               const VectorField& L,
                                               const Expr& V);

/// Residuals of (L_b V^,b)_,a + 2 L_(a;b) V^,b (three components) and of the
/// three second-order integrability conditions; with L = 0 the latter are
/// the complete system.
ConditionReport residuals_I11(const KtParams& kt, const VectorField& L,
                              const Expr& V, const ParamSet& params,
                              std::span<const Point7> samples, double tol);

/// Residuals of (L_b V^,b)_,a + 2 L_(a;b) V^,b.
ConditionReport residuals_I20(const VectorField& L, const Expr& V,
                              const ParamSet& params,
                              std::span<const Point7> samples, double tol);

/// L a Killing vector: residual of L_a V^,a - s. Non-KV input is rejected.
ConditionReport residual_LFI(const VectorField& Lkv, const Expr& V, Complex s,
                             const ParamSet& params,
                             std::span<const Point7> samples, double tol);

/// Residuals of (L_b V^,b)_,a + 2 L_(a;b) V^,b + lambda^2 L_a.
ConditionReport residual_I3(const VectorField& L, Complex lambda, const Expr& V,
                            const ParamSet& params,
                            std::span<const Point7> samples, double tol);

using Point3 = std::array<double, 3>;

/// Line integral of (2 C_ab V^,b - L_a) dq^a along base -> target, adaptive
/// Gauss-Kronrod per segment; path-independent (up to quadrature error)
/// exactly when the integrability conditions hold.
Complex reconstruct_G(const SymTensorField& C, const VectorField& L,
                      const Expr& V, const ParamSet& params, Point3 base,
                      Point3 target);

/// Same integral along a polyline.
Complex reconstruct_G_path(const SymTensorField& C, const VectorField& L,
                           const Expr& V, const ParamSet& params,
                           std::span<const Point3> waypoints);

}  // namespace symfi::qfi
