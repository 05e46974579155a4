#include "symfi/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace symfi::ex {

namespace {

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

bool is_const(const Expr& e, Complex v) {
  return e.kind() == Kind::Constant && e.node().value == v;
}

long long llgcd(long long a, long long b) {
  a = std::llabs(a);
  b = std::llabs(b);
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a ? a : 1;
}

}  // namespace

int var_index(std::string_view name) {
  for (std::size_t k = 0; k < kVarNames.size(); ++k)
    if (kVarNames[k] == name) return static_cast<int>(k);
  return -1;
}

Expr::Expr() : n_(make_node(Node{.kind = Kind::Constant, .value = {0, 0}})) {}

Expr Expr::constant(Complex v) {
  return Expr(make_node(Node{.kind = Kind::Constant, .value = v}));
}

Expr Expr::variable(int idx) {
  if (idx < 0 || idx >= 7) throw std::invalid_argument("bad variable index");
  return Expr(make_node(Node{.kind = Kind::Variable, .var = idx}));
}

Expr Expr::variable(std::string_view name) {
  int idx = var_index(name);
  if (idx < 0) throw std::invalid_argument("not a canonical variable: " + std::string(name));
  return variable(idx);
}

Expr Expr::parameter(std::string name) {
  return Expr(make_node(Node{.kind = Kind::Parameter, .name = std::move(name)}));
}

Kind Expr::kind() const { return n_->kind; }
bool Expr::is_zero() const { return is_const(*this, {0, 0}); }
bool Expr::is_one() const { return is_const(*this, {1, 0}); }

bool Expr::same(const Expr& other) const {
  if (n_ == other.n_) return true;
  const Node& a = *n_;
  const Node& b = *other.n_;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Constant:
      return a.value == b.value;
    case Kind::Variable:
      return a.var == b.var;
    case Kind::Parameter:
      return a.name == b.name;
    case Kind::Power:
      if (a.pnum != b.pnum || a.pden != b.pden) return false;
      break;
    case Kind::Call:
      if (a.fun != b.fun) return false;
      break;
    default:
      break;
  }
  if (a.kids.size() != b.kids.size()) return false;
  for (std::size_t k = 0; k < a.kids.size(); ++k)
    if (!a.kids[k].same(b.kids[k])) return false;
  return true;
}

// Sums and products are kept binary: re-association would change rounded
// float results, and eval must be an exact homomorphism over + and *.
// Hoisting constants to the front is exact (IEEE + and complex * commute).
Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) return constant(Complex{0, 0});
  Expr acc = terms[0];
  for (std::size_t k = 1; k < terms.size(); ++k) {
    Expr t = terms[k];
    if (acc.kind() == Kind::Constant && t.kind() == Kind::Constant) {
      acc = constant(acc.node().value + t.node().value);
      continue;
    }
    if (acc.is_zero()) {
      acc = t;
      continue;
    }
    if (t.is_zero()) continue;
    Node n{.kind = Kind::Sum};
    n.kids = {std::move(acc), std::move(t)};
    acc = Expr(make_node(std::move(n)));
  }
  return acc;
}

namespace {
std::pair<Expr, std::pair<long long, long long>> split_power(const Expr& e) {
  if (e.kind() == Kind::Power)
    return {e.node().kids[0], {e.node().pnum, e.node().pden}};
  return {e, {1, 1}};
}
}  // namespace

Expr Expr::product(std::vector<Expr> factors) {
  if (factors.empty()) return constant(Complex{1, 0});
  Expr acc = factors[0];
  for (std::size_t k = 1; k < factors.size(); ++k) {
    Expr f = factors[k];
    if (acc.kind() == Kind::Constant && f.kind() == Kind::Constant) {
      acc = constant(acc.node().value * f.node().value);
      continue;
    }
    if (acc.is_zero() || f.is_zero()) {
      acc = constant(Complex{0, 0});
      continue;
    }
    if (acc.is_one()) {
      acc = f;
      continue;
    }
    if (f.is_one()) continue;
    // Keep a single leading constant: c1*(c2*x) -> (c1 c2)*x, x*c -> c*x.
    if (f.kind() == Kind::Constant) std::swap(acc, f);
    if (acc.kind() == Kind::Constant && f.kind() == Kind::Product &&
        f.node().kids[0].kind() == Kind::Constant) {
      Complex c = acc.node().value * f.node().kids[0].node().value;
      acc = constant(c);
      f = f.node().kids[1];
      if (acc.is_one()) {
        acc = f;
        continue;
      }
      if (acc.is_zero()) continue;
    }
    // Power merging for structurally equal bases.
    if (acc.kind() != Kind::Constant) {
      auto [ab, ae] = split_power(acc);
      auto [fb, fe] = split_power(f);
      if (ab.same(fb)) {
        acc = power(ab, ae.first * fe.second + fe.first * ae.second,
                    ae.second * fe.second);
        continue;
      }
    }
    Node n{.kind = Kind::Product};
    n.kids = {std::move(acc), std::move(f)};
    acc = Expr(make_node(std::move(n)));
  }
  return acc;
}

Expr Expr::quotient(Expr num, Expr den) {
  if (num.is_zero() && !den.is_zero()) return num;
  if (den.is_one()) return num;
  if (num.kind() == Kind::Constant && den.kind() == Kind::Constant &&
      den.node().value != Complex{0, 0})
    return constant(num.node().value / den.node().value);
  Node n{.kind = Kind::Quotient};
  n.kids = {std::move(num), std::move(den)};
  return Expr(make_node(std::move(n)));
}

Expr Expr::power(Expr base, long long num, long long den) {
  if (den == 0) throw std::invalid_argument("zero exponent denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = llgcd(num, den);
  num /= g;
  den /= g;
  if (num == 0) return constant(Complex{1, 0});
  if (num == 1 && den == 1) return base;
  if (base.kind() == Kind::Power) {
    long long n2 = base.node().pnum * num, d2 = base.node().pden * den;
    return power(base.node().kids[0], n2, d2);
  }
  if (base.kind() == Kind::Constant) {
    Complex v = base.node().value;
    if (den == 1 && num > 0 && num <= 16) {
      Complex r{1, 0};
      for (long long k = 0; k < num; ++k) r *= v;
      return constant(r);
    }
    if (v == Complex{1, 0}) return base;
  }
  Node n{.kind = Kind::Power, .pnum = num, .pden = den};
  n.kids = {std::move(base)};
  return Expr(make_node(std::move(n)));
}

Expr Expr::call(Fun f, std::vector<Expr> args) {
  Node n{.kind = Kind::Call, .fun = f};
  n.kids = std::move(args);
  return Expr(make_node(std::move(n)));
}

Expr operator-(const Expr& a) { return Expr::product({Expr::constant(-1.0), a}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, -b}); }

void Expr::collect_parameters(std::set<std::string>& out) const {
  if (kind() == Kind::Parameter) out.insert(node().name);
  for (const auto& k : node().kids) k.collect_parameters(out);
}

std::set<std::string> Expr::parameters() const {
  std::set<std::string> out;
  collect_parameters(out);
  return out;
}

bool Expr::depends_on(int var) const {
  if (kind() == Kind::Variable) return node().var == var;
  for (const auto& k : node().kids)
    if (k.depends_on(var)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Evaluation

Complex eval(const Expr& e, const Binding& b) {
  const Node& n = e.node();
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Variable: {
      auto it = b.vals.find(kVarNames[n.var]);
      if (it == b.vals.end())
        throw EvalError("unbound variable: " + std::string(kVarNames[n.var]));
      return it->second;
    }
    case Kind::Parameter: {
      auto it = b.vals.find(n.name);
      if (it == b.vals.end()) throw EvalError("unbound parameter: " + n.name);
      return it->second;
    }
    case Kind::Sum: {
      Complex s{0, 0};
      for (const auto& k : n.kids) s += eval(k, b);
      return s;
    }
    case Kind::Product: {
      Complex p{1, 0};
      for (const auto& k : n.kids) p *= eval(k, b);
      return p;
    }
    case Kind::Quotient: {
      Complex num = eval(n.kids[0], b), den = eval(n.kids[1], b);
      if (den == Complex{0, 0}) throw EvalError("division by zero");
      return num / den;
    }
    case Kind::Power: {
      Complex base = eval(n.kids[0], b);
      if (n.pden == 1) {
        long long k = n.pnum;
        if (base == Complex{0, 0}) {
          if (k < 0) throw EvalError("zero base with negative exponent");
          return k == 0 ? Complex{1, 0} : Complex{0, 0};
        }
        bool inv = k < 0;
        unsigned long long m = inv ? -(unsigned long long)k : (unsigned long long)k;
        Complex acc{1, 0}, p = base;
        while (m) {
          if (m & 1) acc *= p;
          p *= p;
          m >>= 1;
        }
        return inv ? Complex{1, 0} / acc : acc;
      }
      if (base == Complex{0, 0} && n.pnum < 0)
        throw EvalError("zero base with negative exponent");
      return std::pow(base, double(n.pnum) / double(n.pden));
    }
    case Kind::Call: {
      Complex a = eval(n.kids[0], b);
      switch (n.fun) {
        case Fun::Sin: return std::sin(a);
        case Fun::Cos: return std::cos(a);
        case Fun::Exp: return std::exp(a);
        case Fun::Log:
          if (a == Complex{0, 0}) throw EvalError("log of zero");
          return std::log(a);
        case Fun::Sqrt: return std::sqrt(a);
        case Fun::Atan: return std::atan(a);
        case Fun::Atan2: {
          Complex x = eval(n.kids[1], b);
          if (a.imag() == 0.0 && x.imag() == 0.0)
            return Complex(std::atan2(a.real(), x.real()), 0.0);
          Complex w = x + Complex(0, 1) * a;
          if (w == Complex{0, 0}) throw EvalError("atan2 at the origin");
          return Complex(0, -1) * std::log(w / std::sqrt(x * x + a * a));
        }
      }
      throw EvalError("bad function");
    }
  }
  throw EvalError("bad node");
}

// ---------------------------------------------------------------------------
// Differentiation

Expr Expr::diff(int var) const {
  if (var < 0 || var >= 7) throw std::invalid_argument("bad diff variable");
  const Node& n = node();
  switch (n.kind) {
    case Kind::Constant:
    case Kind::Parameter:
      return constant(0.0);
    case Kind::Variable:
      return constant(n.var == var ? 1.0 : 0.0);
    case Kind::Sum: {
      std::vector<Expr> d;
      d.reserve(n.kids.size());
      for (const auto& k : n.kids) d.push_back(k.diff(var));
      return sum(std::move(d));
    }
    case Kind::Product: {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < n.kids.size(); ++k) {
        std::vector<Expr> f;
        f.reserve(n.kids.size());
        for (std::size_t j = 0; j < n.kids.size(); ++j)
          f.push_back(j == k ? n.kids[j].diff(var) : n.kids[j]);
        terms.push_back(product(std::move(f)));
      }
      return sum(std::move(terms));
    }
    case Kind::Quotient: {
      const Expr& u = n.kids[0];
      const Expr& v = n.kids[1];
      return quotient(u.diff(var) * v - u * v.diff(var), v * v);
    }
    case Kind::Power: {
      const Expr& u = n.kids[0];
      Expr coef = quotient(constant(double(n.pnum)), constant(double(n.pden)));
      return coef * power(u, n.pnum - n.pden, n.pden) * u.diff(var);
    }
    case Kind::Call: {
      const Expr& u = n.kids[0];
      Expr du = u.diff(var);
      switch (n.fun) {
        case Fun::Sin: return call(Fun::Cos, {u}) * du;
        case Fun::Cos: return -(call(Fun::Sin, {u}) * du);
        case Fun::Exp: return call(Fun::Exp, {u}) * du;
        case Fun::Log: return quotient(du, u);
        case Fun::Sqrt: return quotient(du, constant(2.0) * call(Fun::Sqrt, {u}));
        case Fun::Atan: return quotient(du, constant(1.0) + u * u);
        case Fun::Atan2: {
          const Expr& x = n.kids[1];
          Expr dx = x.diff(var);
          return quotient(du * x - u * dx, u * u + x * x);
        }
      }
      throw std::logic_error("bad function");
    }
  }
  throw std::logic_error("bad node");
}

Expr Expr::substitute(std::string_view param, const Expr& repl) const {
  const Node& n = node();
  if (n.kind == Kind::Parameter) return n.name == param ? repl : *this;
  if (n.kids.empty()) return *this;
  std::vector<Expr> kids;
  kids.reserve(n.kids.size());
  bool changed = false;
  for (const auto& k : n.kids) {
    Expr s = k.substitute(param, repl);
    changed = changed || s.n_ != k.n_;
    kids.push_back(std::move(s));
  }
  if (!changed) return *this;
  switch (n.kind) {
    case Kind::Sum: return sum(std::move(kids));
    case Kind::Product: return product(std::move(kids));
    case Kind::Quotient: return quotient(kids[0], kids[1]);
    case Kind::Power: return power(kids[0], n.pnum, n.pden);
    case Kind::Call: return call(n.fun, std::move(kids));
    default: return *this;
  }
}

// ---------------------------------------------------------------------------
// Printing (must re-parse to a structurally equal tree)

namespace {

const char* fun_name(Fun f) {
  switch (f) {
    case Fun::Sin: return "sin";
    case Fun::Cos: return "cos";
    case Fun::Exp: return "exp";
    case Fun::Log: return "log";
    case Fun::Sqrt: return "sqrt";
    case Fun::Atan: return "atan";
    case Fun::Atan2: return "atan2";
  }
  return "?";
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Precedence levels: 0 sum, 1 product/quotient, 2 unary, 3 power, 4 atom.
void print(const Expr& e, std::string& out, int parent_prec);

void print_const(Complex v, std::string& out, int parent_prec) {
  if (v.imag() == 0.0) {
    bool neg = std::signbit(v.real()) && v.real() != 0.0;
    if (neg && parent_prec >= 2) {
      out += '(';
      out += fmt_double(v.real());
      out += ')';
    } else {
      out += fmt_double(v.real());
    }
    return;
  }
  // General complex literal: (re+im*i); folds back to one constant on parse.
  out += '(';
  out += fmt_double(v.real());
  if (!std::signbit(v.imag())) out += '+';
  out += fmt_double(v.imag());
  out += "*i)";
}

void print(const Expr& e, std::string& out, int parent_prec) {
  const Node& n = e.node();
  switch (n.kind) {
    case Kind::Constant:
      print_const(n.value, out, parent_prec);
      return;
    case Kind::Variable:
      out += kVarNames[n.var];
      return;
    case Kind::Parameter:
      out += n.name;
      return;
    case Kind::Sum: {
      // Left-nested chains print flat; the parser rebuilds the same shape.
      bool paren = parent_prec > 0;
      if (paren) out += '(';
      print(n.kids[0], out, 0);
      const Node& r = n.kids[1].node();
      if (r.kind == Kind::Constant && r.value.imag() == 0.0 &&
          std::signbit(r.value.real()) && r.value.real() != 0.0) {
        out += " - ";
        out += fmt_double(-r.value.real());
      } else if (r.kind == Kind::Product &&
                 r.kids[0].kind() == Kind::Constant &&
                 r.kids[0].node().value.imag() == 0.0 &&
                 std::signbit(r.kids[0].node().value.real())) {
        out += " - ";
        double c = -r.kids[0].node().value.real();
        if (c != 1.0) {
          out += fmt_double(c);
          out += '*';
          print(r.kids[1], out, 2);
        } else {
          print(r.kids[1], out, 1);
        }
      } else {
        out += " + ";
        print(n.kids[1], out, 1);
      }
      if (paren) out += ')';
      return;
    }
    case Kind::Product: {
      bool paren = parent_prec > 1;
      if (paren) out += '(';
      print(n.kids[0], out, 1);
      out += '*';
      print(n.kids[1], out, 2);
      if (paren) out += ')';
      return;
    }
    case Kind::Quotient: {
      bool paren = parent_prec > 1;
      if (paren) out += '(';
      print(n.kids[0], out, 2);
      out += '/';
      print(n.kids[1], out, 2);
      if (paren) out += ')';
      return;
    }
    case Kind::Power: {
      bool paren = parent_prec > 3;
      if (paren) out += '(';
      print(n.kids[0], out, 4);
      out += '^';
      if (n.pden == 1 && n.pnum >= 0) {
        out += std::to_string(n.pnum);
      } else {
        out += '(';
        out += std::to_string(n.pnum);
        if (n.pden != 1) {
          out += '/';
          out += std::to_string(n.pden);
        }
        out += ')';
      }
      if (paren) out += ')';
      return;
    }
    case Kind::Call: {
      out += fun_name(n.fun);
      out += '(';
      for (std::size_t k = 0; k < n.kids.size(); ++k) {
        if (k) out += ", ";
        print(n.kids[k], out, 0);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string Expr::str() const {
  std::string out;
  print(*this, out, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over the module grammar.

namespace {

struct Parser {
  std::string_view src;
  std::size_t pos = 0;
  int depth = 0;
  const ParseContext& ctx;

  explicit Parser(std::string_view s, const ParseContext& c) : src(s), ctx(c) {}

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& pp) : p(pp) {
      if (++p.depth > 400) throw ParseError(p.pos, "expression too deep");
    }
    ~DepthGuard() { --p.depth; }
  };

  void skip_ws() {
    while (pos < src.size() && std::isspace((unsigned char)src[pos])) ++pos;
  }
  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(pos, std::string("expected ") + what);
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      char c = peek();
      if (c == '+') {
        ++pos;
        lhs = lhs + parse_term();
      } else if (c == '-') {
        ++pos;
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      char c = peek();
      if (c == '*') {
        ++pos;
        lhs = lhs * parse_unary();
      } else if (c == '/') {
        ++pos;
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (peek() == '-') {
      ++pos;
      return -parse_unary();
    }
    if (peek() == '+') {
      ++pos;
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (peek() == '^') {
      ++pos;
      auto [num, den] = parse_exponent();
      return Expr::power(base, num, den);
    }
    return base;
  }

  long long parse_int() {
    skip_ws();
    std::size_t start = pos;
    bool neg = false;
    if (pos < src.size() && (src[pos] == '-' || src[pos] == '+')) {
      neg = src[pos] == '-';
      ++pos;
    }
    if (pos >= src.size() || !std::isdigit((unsigned char)src[pos]))
      throw ParseError(start, "expected integer");
    long long v = 0;
    while (pos < src.size() && std::isdigit((unsigned char)src[pos])) {
      v = v * 10 + (src[pos] - '0');
      ++pos;
    }
    return neg ? -v : v;
  }

  // Rational exponent; right-associative chains fold when the tail is an
  // integer (x^2^3 == x^(2^3)).
  std::pair<long long, long long> parse_exponent() {
    skip_ws();
    long long num, den = 1;
    std::size_t start = pos;
    if (accept('(')) {
      num = parse_int();
      if (accept('/')) den = parse_int();
      expect(')', "')' in exponent");
    } else {
      num = parse_int();
    }
    if (peek() == '^') {
      ++pos;
      auto [tn, td] = parse_exponent();
      if (td != 1 || tn < 0)
        throw ParseError(start, "chained exponent must be a nonnegative integer");
      long long rn = 1, rd = 1;
      for (long long k = 0; k < tn; ++k) {
        rn *= num;
        rd *= den;
      }
      num = rn;
      den = rd;
    }
    if (den == 0) throw ParseError(start, "zero denominator in exponent");
    return {num, den};
  }

  Expr parse_number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
    if (pos < src.size() && src[pos] == '.') {
      ++pos;
      while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
    }
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
      if (pos < src.size() && std::isdigit((unsigned char)src[pos])) {
        while (pos < src.size() && std::isdigit((unsigned char)src[pos])) ++pos;
      } else {
        pos = mark;  // 'e' belongs to an identifier-like token, not this literal
      }
    }
    double v = 0;
    auto res = std::from_chars(src.data() + start, src.data() + pos, v);
    if (res.ec != std::errc() || res.ptr != src.data() + pos)
      throw ParseError(start, "bad numeric literal");
    return Expr::constant(v);
  }

  std::string parse_ident() {
    skip_ws();
    std::size_t start = pos;
    if (pos >= src.size() ||
        !(std::isalpha((unsigned char)src[pos]) || src[pos] == '_'))
      throw ParseError(start, "expected identifier");
    while (pos < src.size() &&
           (std::isalnum((unsigned char)src[pos]) || src[pos] == '_'))
      ++pos;
    return std::string(src.substr(start, pos - start));
  }

  Expr macro(std::string_view name) {
    auto X = Expr::variable(1), Y = Expr::variable(2), Z = Expr::variable(3);
    auto VX = Expr::variable(4), VY = Expr::variable(5), VZ = Expr::variable(6);
    if (name == "r") return Expr::power(X * X + Y * Y + Z * Z, 1, 2);
    if (name == "R") return Expr::power(X * X + Y * Y, 1, 2);
    if (name == "M1") return Y * VZ - Z * VY;
    if (name == "M2") return Z * VX - X * VZ;
    if (name == "M3") return X * VY - Y * VX;
    if (name == "w") return X + Expr::imaginary() * Y;
    if (name == "wbar") return X - Expr::imaginary() * Y;
    throw std::logic_error("not a macro");
  }

  static bool is_macro(std::string_view name) {
    return name == "r" || name == "R" || name == "M1" || name == "M2" ||
           name == "M3" || name == "w" || name == "wbar";
  }

  static int builtin_fun(std::string_view name, Fun& out) {
    if (name == "sin") out = Fun::Sin;
    else if (name == "cos") out = Fun::Cos;
    else if (name == "exp") out = Fun::Exp;
    else if (name == "log") out = Fun::Log;
    else if (name == "sqrt") out = Fun::Sqrt;
    else if (name == "atan") out = Fun::Atan;
    else if (name == "atan2") out = Fun::Atan2;
    else return 0;
    return (name == "atan2") ? 2 : 1;
  }

  std::vector<Expr> parse_args() {
    expect('(', "'('");
    std::vector<Expr> args;
    if (peek() != ')') {
      args.push_back(parse_expr());
      while (accept(',')) args.push_back(parse_expr());
    }
    expect(')', "')'");
    return args;
  }

  Expr parse_atom() {
    DepthGuard guard(*this);
    skip_ws();
    std::size_t start = pos;
    if (pos >= src.size()) throw ParseError(start, "unexpected end of input");
    char c = src[pos];
    if (c == '(') {
      ++pos;
      Expr e = parse_expr();
      expect(')', "')'");
      return e;
    }
    if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
    if (std::isalpha((unsigned char)c) || c == '_') {
      std::string name = parse_ident();
      if (name == "i") return Expr::imaginary();
      Fun f;
      if (int arity = builtin_fun(name, f)) {
        auto args = parse_args();
        if ((int)args.size() != arity)
          throw ParseError(start, name + " takes " + std::to_string(arity) +
                                      " argument(s)");
        return Expr::call(f, std::move(args));
      }
      if (auto it = ctx.functions.find(name); it != ctx.functions.end()) {
        const FunctionDef& def = it->second;
        if (peek() == '(') {
          auto args = parse_args();
          if (def.arity != 0 && (int)args.size() != def.arity)
            throw ParseError(start, name + " expects " +
                                        std::to_string(def.arity) + " argument(s)");
          Expr body = def.body;
          for (std::size_t k = 0; k < args.size(); ++k)
            body = body.substitute("s" + std::to_string(k + 1), args[k]);
          return body;
        }
        return def.body;  // bare marker
      }
      if (int idx = var_index(name); idx >= 0) return Expr::variable(idx);
      if (is_macro(name)) return macro(name);
      if (ctx.params.count(name)) return Expr::parameter(std::move(name));
      throw ParseError(start, "unknown identifier '" + name + "'");
    }
    throw ParseError(start, std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expr parse(std::string_view text, const ParseContext& ctx) {
  Parser p(text, ctx);
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) throw ParseError(p.pos, "trailing input");
  return e;
}

Expr parse(std::string_view text, std::initializer_list<const char*> params) {
  ParseContext ctx;
  for (const char* p : params) ctx.params.insert(p);
  return parse(text, ctx);
}

}  // namespace symfi::ex
