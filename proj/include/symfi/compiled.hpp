#pragma once

#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "symfi/expr.hpp"

namespace symfi::ex {

/// Flattened postfix program for fast repeated evaluation of one or more
/// expressions at the same point. Parameters are resolved to slots against
/// a fixed name order at compile time.
///
/// eval() is templated on the scalar: complex<long double> for residual
/// work (cancellation headroom), complex<double> or plain double for
/// trajectory integration. The plain-double instantiation is only valid
/// for tapes that are_real() reports true for.
class Tape {
 public:
  struct EvalStats {
    double min_den = std::numeric_limits<double>::infinity();
    double min_cut = std::numeric_limits<double>::infinity();  // branch-cut proximity
    bool domain_error = false;  // log(0), 0^negative, ...
    // When set, receives the argument of every branch operation (sqrt, log,
    // fractional power) in tape order; consecutive evaluations can then be
    // compared to detect a cut crossing that sampling would miss.
    std::vector<std::complex<double>>* branch_args = nullptr;
  };

  static Tape compile(std::span<const Expr> outputs,
                      std::span<const std::string> param_order);
  static Tape compile(const Expr& e, std::span<const std::string> param_order);

  int num_outputs() const { return n_outputs_; }
  std::size_t num_ops() const { return ops_.size(); }

  /// True when every constant is real and no op can leave the reals for
  /// real inputs (no calls, integer powers only).
  bool is_real_safe() const { return real_safe_; }

  template <class T>
  EvalStats eval(std::span<const T> vars7, std::span<const T> params,
                 std::span<T> out,
                 std::vector<std::complex<double>>* branch_args = nullptr) const;

  /// Convenience: complex<double> in, long-double accumulation inside.
  EvalStats eval_ld(std::span<const std::complex<double>> vars7,
                    std::span<const std::complex<double>> params,
                    std::span<std::complex<double>> out) const;

 private:
  enum class Op : std::uint8_t {
    Const, Var, Param, Add, Mul, Div, PowInt, PowRat, Output,
    Sin, Cos, Exp, Log, Sqrt, Atan, Atan2
  };
  struct Instr {
    Op op;
    std::int32_t a = 0;  // Const/Param index, Var slot, Add/Mul arity, PowInt k, PowRat num
    std::int32_t b = 0;  // PowRat den, Output slot
  };
  std::vector<Instr> ops_;
  std::vector<std::complex<double>> consts_;
  int n_outputs_ = 0;
  std::size_t max_stack_ = 0;
  bool real_safe_ = true;

  void emit(const Expr& e, const std::vector<std::string>& params,
            std::size_t& depth);
};

extern template Tape::EvalStats Tape::eval<double>(
    std::span<const double>, std::span<const double>, std::span<double>,
    std::vector<std::complex<double>>*) const;
extern template Tape::EvalStats Tape::eval<long double>(
    std::span<const long double>, std::span<const long double>,
    std::span<long double>, std::vector<std::complex<double>>*) const;
extern template Tape::EvalStats Tape::eval<std::complex<double>>(
    std::span<const std::complex<double>>, std::span<const std::complex<double>>,
    std::span<std::complex<double>>, std::vector<std::complex<double>>*) const;
extern template Tape::EvalStats Tape::eval<std::complex<long double>>(
    std::span<const std::complex<long double>>,
    std::span<const std::complex<long double>>,
    std::span<std::complex<long double>>,
    std::vector<std::complex<double>>*) const;

}  // namespace symfi::ex
