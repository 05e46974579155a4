#include "symfi/compiled.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symfi::ex {

namespace {

template <class T>
struct Traits;

template <>
struct Traits<double> {
  static double abs(double v) { return std::fabs(v); }
  static double from_const(std::complex<double> c) { return c.real(); }
};
template <>
struct Traits<long double> {
  static double abs(long double v) { return (double)std::fabs(v); }
  static long double from_const(std::complex<double> c) { return c.real(); }
};
template <>
struct Traits<std::complex<double>> {
  static double abs(const std::complex<double>& v) { return std::abs(v); }
  static std::complex<double> from_const(std::complex<double> c) { return c; }
};
template <>
struct Traits<std::complex<long double>> {
  static double abs(const std::complex<long double>& v) {
    return (double)std::abs(v);
  }
  static std::complex<long double> from_const(std::complex<double> c) {
    return {c.real(), c.imag()};
  }
};

template <class T>
T pow_int(T base, long long k) {
  bool inv = k < 0;
  unsigned long long m = inv ? -(unsigned long long)k : (unsigned long long)k;
  T acc(1), p = base;
  while (m) {
    if (m & 1) acc *= p;
    p *= p;
    m >>= 1;
  }
  if (inv) return T(1) / acc;
  return acc;
}

double pow_rat(double base, long long num, long long den, bool& dom) {
  if (base < 0) {
    dom = true;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::pow(base, double(num) / double(den));
}
long double pow_rat(long double base, long long num, long long den, bool& dom) {
  if (base < 0) {
    dom = true;
    return std::numeric_limits<long double>::quiet_NaN();
  }
  return std::pow(base, (long double)num / (long double)den);
}
template <class R>
std::complex<R> pow_rat(const std::complex<R>& base, long long num,
                        long long den, bool&) {
  return std::pow(base, R(num) / R(den));
}

double do_atan2(double y, double x, bool&) { return std::atan2(y, x); }
long double do_atan2(long double y, long double x, bool&) {
  return std::atan2(y, x);
}
template <class R>
std::complex<R> do_atan2(const std::complex<R>& y, const std::complex<R>& x,
                         bool& dom) {
  if (y.imag() == R(0) && x.imag() == R(0))
    return {std::atan2(y.real(), x.real()), R(0)};
  std::complex<R> w = x + std::complex<R>(0, 1) * y;
  if (w == std::complex<R>(0, 0)) {
    dom = true;
    return w;
  }
  return std::complex<R>(0, -1) * std::log(w / std::sqrt(x * x + y * y));
}

template <class R>
R do_fun_real(int which, R a, bool& dom) {
  switch (which) {
    case 0: return std::sin(a);
    case 1: return std::cos(a);
    case 2: return std::exp(a);
    case 3:
      if (a <= 0) { dom = true; return std::numeric_limits<R>::quiet_NaN(); }
      return std::log(a);
    case 4:
      if (a < 0) { dom = true; return std::numeric_limits<R>::quiet_NaN(); }
      return std::sqrt(a);
    case 5: return std::atan(a);
  }
  return 0;
}
double do_fun(int which, double a, bool& dom) { return do_fun_real(which, a, dom); }
long double do_fun(int which, long double a, bool& dom) {
  return do_fun_real(which, a, dom);
}
template <class R>
std::complex<R> do_fun(int which, const std::complex<R>& a, bool& dom) {
  switch (which) {
    case 0: return std::sin(a);
    case 1: return std::cos(a);
    case 2: return std::exp(a);
    case 3:
      if (a == std::complex<R>(0, 0)) { dom = true; return a; }
      return std::log(a);
    case 4: return std::sqrt(a);
    case 5: return std::atan(a);
  }
  return {};
}

double cut_metric(double) { return std::numeric_limits<double>::infinity(); }
double cut_metric(long double) {
  return std::numeric_limits<double>::infinity();
}
template <class R>
double cut_metric(const std::complex<R>& u) {
  // Distance proxy to the principal branch cut along the negative reals.
  if (u.real() >= R(0)) return std::numeric_limits<double>::infinity();
  return (double)std::fabs((double)u.imag());
}

void record_branch_arg(std::vector<std::complex<double>>* sink, double v) {
  if (sink) sink->emplace_back(v, 0.0);
}
void record_branch_arg(std::vector<std::complex<double>>* sink, long double v) {
  if (sink) sink->emplace_back((double)v, 0.0);
}
template <class R>
void record_branch_arg(std::vector<std::complex<double>>* sink,
                       const std::complex<R>& v) {
  if (sink) sink->emplace_back((double)v.real(), (double)v.imag());
}

}  // namespace

void Tape::emit(const Expr& e, const std::vector<std::string>& params,
                std::size_t& depth) {
  const Node& n = e.node();
  auto push1 = [&](std::size_t used) {
    // net stack effect: consumed `used`, produced 1
    depth = depth - used + 1;
    max_stack_ = std::max(max_stack_, depth);
  };
  switch (n.kind) {
    case Kind::Constant: {
      if (n.value.imag() != 0.0) real_safe_ = false;
      consts_.push_back(n.value);
      ops_.push_back({Op::Const, (std::int32_t)consts_.size() - 1, 0});
      push1(0);
      return;
    }
    case Kind::Variable:
      ops_.push_back({Op::Var, n.var, 0});
      push1(0);
      return;
    case Kind::Parameter: {
      auto it = std::find(params.begin(), params.end(), n.name);
      if (it == params.end())
        throw std::invalid_argument("unbound parameter in tape: " + n.name);
      ops_.push_back({Op::Param, (std::int32_t)(it - params.begin()), 0});
      push1(0);
      return;
    }
    case Kind::Sum:
    case Kind::Product: {
      for (const auto& k : n.kids) emit(k, params, depth);
      ops_.push_back({n.kind == Kind::Sum ? Op::Add : Op::Mul,
                      (std::int32_t)n.kids.size(), 0});
      push1(n.kids.size());
      return;
    }
    case Kind::Quotient:
      emit(n.kids[0], params, depth);
      emit(n.kids[1], params, depth);
      ops_.push_back({Op::Div, 0, 0});
      push1(2);
      return;
    case Kind::Power:
      emit(n.kids[0], params, depth);
      if (n.pden == 1) {
        ops_.push_back({Op::PowInt, (std::int32_t)n.pnum, 0});
      } else {
        real_safe_ = false;
        ops_.push_back({Op::PowRat, (std::int32_t)n.pnum, (std::int32_t)n.pden});
      }
      push1(1);
      return;
    case Kind::Call: {
      real_safe_ = false;
      for (const auto& k : n.kids) emit(k, params, depth);
      static constexpr Op fun_ops[] = {Op::Sin, Op::Cos, Op::Exp, Op::Log,
                                       Op::Sqrt, Op::Atan, Op::Atan2};
      ops_.push_back({fun_ops[(int)n.fun], 0, 0});
      push1(n.kids.size());
      return;
    }
  }
}

Tape Tape::compile(std::span<const Expr> outputs,
                   std::span<const std::string> param_order) {
  Tape t;
  std::vector<std::string> params(param_order.begin(), param_order.end());
  t.n_outputs_ = (int)outputs.size();
  std::size_t depth = 0;
  for (int k = 0; k < t.n_outputs_; ++k) {
    t.emit(outputs[k], params, depth);
    t.ops_.push_back({Op::Output, 0, k});
    depth -= 1;
  }
  return t;
}

Tape Tape::compile(const Expr& e, std::span<const std::string> param_order) {
  return compile(std::span<const Expr>(&e, 1), param_order);
}

template <class T>
Tape::EvalStats Tape::eval(std::span<const T> vars7, std::span<const T> params,
                           std::span<T> out,
                           std::vector<std::complex<double>>* branch_args) const {
  EvalStats st;
  st.branch_args = branch_args;
  T small_stack[64];
  std::vector<T> big;
  T* sp = small_stack;
  if (max_stack_ > 64) {
    big.resize(max_stack_);
    sp = big.data();
  }
  std::size_t top = 0;
  for (const Instr& in : ops_) {
    switch (in.op) {
      case Op::Const:
        sp[top++] = Traits<T>::from_const(consts_[in.a]);
        break;
      case Op::Var:
        sp[top++] = vars7[in.a];
        break;
      case Op::Param:
        sp[top++] = params[in.a];
        break;
      case Op::Add: {
        T acc = sp[top - in.a];
        for (std::int32_t k = 1; k < in.a; ++k) acc += sp[top - in.a + k];
        top -= in.a;
        sp[top++] = acc;
        break;
      }
      case Op::Mul: {
        T acc = sp[top - in.a];
        for (std::int32_t k = 1; k < in.a; ++k) acc *= sp[top - in.a + k];
        top -= in.a;
        sp[top++] = acc;
        break;
      }
      case Op::Div: {
        T den = sp[--top];
        double m = Traits<T>::abs(den);
        if (m < st.min_den) st.min_den = m;
        if (m == 0.0) st.domain_error = true;
        sp[top - 1] = sp[top - 1] / den;
        break;
      }
      case Op::PowInt: {
        if (in.a < 0) {
          double m = Traits<T>::abs(sp[top - 1]);
          if (m < st.min_den) st.min_den = m;
          if (m == 0.0) st.domain_error = true;
        }
        sp[top - 1] = pow_int(sp[top - 1], in.a);
        break;
      }
      case Op::PowRat: {
        if (in.a < 0) {
          double m = Traits<T>::abs(sp[top - 1]);
          if (m < st.min_den) st.min_den = m;
          if (m == 0.0) st.domain_error = true;
        }
        st.min_cut = std::min(st.min_cut, cut_metric(sp[top - 1]));
        record_branch_arg(st.branch_args, sp[top - 1]);
        sp[top - 1] = pow_rat(sp[top - 1], in.a, in.b, st.domain_error);
        break;
      }
      case Op::Output:
        out[in.b] = sp[--top];
        break;
      case Op::Atan2: {
        T x = sp[--top];
        sp[top - 1] = do_atan2(sp[top - 1], x, st.domain_error);
        break;
      }
      case Op::Log: {
        double m = Traits<T>::abs(sp[top - 1]);
        if (m < st.min_den) st.min_den = m;
        st.min_cut = std::min(st.min_cut, cut_metric(sp[top - 1]));
        record_branch_arg(st.branch_args, sp[top - 1]);
        sp[top - 1] = do_fun(3, sp[top - 1], st.domain_error);
        break;
      }
      default:
        if (in.op == Op::Sqrt) {
          st.min_cut = std::min(st.min_cut, cut_metric(sp[top - 1]));
          record_branch_arg(st.branch_args, sp[top - 1]);
        }
        sp[top - 1] = do_fun((int)in.op - (int)Op::Sin, sp[top - 1],
                             st.domain_error);
        break;
    }
  }
  return st;
}

Tape::EvalStats Tape::eval_ld(std::span<const std::complex<double>> vars7,
                              std::span<const std::complex<double>> params,
                              std::span<std::complex<double>> out) const {
  using CL = std::complex<long double>;
  CL v[7];
  for (int k = 0; k < 7 && k < (int)vars7.size(); ++k)
    v[k] = {vars7[k].real(), vars7[k].imag()};
  std::vector<CL> p(params.size());
  for (std::size_t k = 0; k < params.size(); ++k)
    p[k] = {params[k].real(), params[k].imag()};
  std::vector<CL> o(out.size());
  auto st = eval<CL>(std::span<const CL>(v, vars7.size()), p, o);
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = {(double)o[k].real(), (double)o[k].imag()};
  return st;
}

template Tape::EvalStats Tape::eval<double>(
    std::span<const double>, std::span<const double>, std::span<double>,
    std::vector<std::complex<double>>*) const;
template Tape::EvalStats Tape::eval<long double>(
    std::span<const long double>, std::span<const long double>,
    std::span<long double>, std::vector<std::complex<double>>*) const;
template Tape::EvalStats Tape::eval<std::complex<double>>(
    std::span<const std::complex<double>>, std::span<const std::complex<double>>,
    std::span<std::complex<double>>, std::vector<std::complex<double>>*) const;
template Tape::EvalStats Tape::eval<std::complex<long double>>(
    std::span<const std::complex<long double>>,
    std::span<const std::complex<long double>>,
    std::span<std::complex<long double>>,
    std::vector<std::complex<double>>*) const;

}  // namespace symfi::ex
