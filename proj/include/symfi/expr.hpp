#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace symfi::ex {

using Complex = std::complex<double>;

enum class Kind : std::uint8_t {
  Constant, Variable, Parameter, Sum, Product, Quotient, Power, Call
};

enum class Fun : std::uint8_t { Sin, Cos, Exp, Log, Sqrt, Atan, Atan2 };

// Canonical phase-space/time variables, in slot order.
inline constexpr std::array<std::string_view, 7> kVarNames{
    "t", "x", "y", "z", "vx", "vy", "vz"};

int var_index(std::string_view name);  // -1 if not canonical

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable symbolic expression over the seven canonical variables and
/// named parameters. Shared subtrees are safe to alias across threads.
class Expr {
 public:
  Expr();  // the constant 0
  static Expr constant(Complex v);
  static Expr constant(double v) { return constant(Complex(v, 0.0)); }
  static Expr variable(int idx);
  static Expr variable(std::string_view name);
  static Expr parameter(std::string name);
  static Expr imaginary() { return constant(Complex(0.0, 1.0)); }

  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr quotient(Expr num, Expr den);
  static Expr power(Expr base, long long num, long long den = 1);
  static Expr call(Fun f, std::vector<Expr> args);

  friend Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
  friend Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }
  friend Expr operator-(const Expr& a);

  const Node& node() const { return *n_; }
  Kind kind() const;
  bool is_zero() const;
  bool is_one() const;

  bool same(const Expr& other) const;  // structural equality
  std::string str() const;             // prints in the module grammar; re-parses to an equal tree

  Expr diff(int var) const;
  Expr diff(std::string_view var) const { return diff(var_index(var)); }
  Expr substitute(std::string_view param, const Expr& repl) const;

  void collect_parameters(std::set<std::string>& out) const;
  std::set<std::string> parameters() const;
  bool depends_on(int var) const;

 private:
  explicit Expr(NodePtr n) : n_(std::move(n)) {}
  NodePtr n_;
  friend struct Node;
  friend class ExprBuilder;
};

struct Node {
  Kind kind;
  Complex value{};                 // Constant
  int var = -1;                    // Variable slot
  std::string name;                // Parameter
  long long pnum = 1, pden = 1;    // Power exponent (reduced, pden > 0)
  Fun fun = Fun::Sin;              // Call
  std::vector<Expr> kids;
};

/// Closed binding for evaluation: every free symbol of the expression must
/// be present (canonical variables under their names, parameters likewise).
struct Binding {
  std::map<std::string, Complex, std::less<>> vals;
  Binding& set(std::string_view name, Complex v) {
    vals.insert_or_assign(std::string(name), v);
    return *this;
  }
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Complex eval(const Expr& e, const Binding& b);

struct ParseError : std::runtime_error {
  ParseError(std::size_t off, const std::string& msg)
      : std::runtime_error(msg + " at offset " + std::to_string(off)),
        offset(off) {}
  std::size_t offset;
};

/// Instantiated arbitrary function: body written in placeholders s1..sN.
struct FunctionDef {
  int arity = 0;  // 0 = bare symbol expansion
  Expr body;
};
using FunctionTable = std::map<std::string, FunctionDef, std::less<>>;

struct ParseContext {
  std::set<std::string, std::less<>> params;
  FunctionTable functions;
};

/// Grammar (by precedence): ^ (right-assoc, rational exponents), unary -,
/// * /, + -; calls name(args); literals: decimal reals, i; reserved
/// variables t x y z vx vy vz; macros r R M1 M2 M3 w wbar.
Expr parse(std::string_view text, const ParseContext& ctx = {});
Expr parse(std::string_view text, std::initializer_list<const char*> params);

}  // namespace symfi::ex
