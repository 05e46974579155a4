#include "symfi/integrator.hpp"

#include <cmath>
#include <sstream>

namespace symfi::dyn {

namespace {

std::array<Expr, 3> grad(const Expr& V) {
  return {V.diff(1), V.diff(2), V.diff(3)};
}

template <class S>
struct Y6 {
  std::array<S, 6> v{};
  Y6 operator+(const Y6& o) const {
    Y6 r;
    for (int k = 0; k < 6; ++k) r.v[k] = v[k] + o.v[k];
    return r;
  }
  Y6 scaled(long double c) const {
    Y6 r;
    for (int k = 0; k < 6; ++k) r.v[k] = v[k] * S(c);
    return r;
  }
  double norm() const {
    double m = 0;
    for (const S& x : v) m = std::max(m, (double)std::abs(x));
    return m;
  }
};

template <class S>
struct RhsEval {
  const ex::Tape& tape;
  const std::vector<S>& params;
  double den_guard;
  double cut_guard;

  // y = (q1..q3, v1..v3); f = (v, -grad V)
  bool operator()(double t, const Y6<S>& y, Y6<S>& f) {
    S vars[7];
    vars[0] = S(t);
    for (int k = 0; k < 3; ++k) vars[1 + k] = y.v[k];
    for (int k = 0; k < 3; ++k) vars[4 + k] = y.v[3 + k];
    S g[3];
    auto st = tape.template eval<S>(std::span<const S>(vars, 7), params,
                                    std::span<S>(g, 3));
    if (st.domain_error || st.min_den < den_guard || st.min_cut < cut_guard)
      return false;
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite((double)std::abs(g[k]))) return false;
      f.v[k] = y.v[3 + k];
      f.v[3 + k] = -g[k];
    }
    return true;
  }
};

template <class S>
void run(const ex::Tape& tape, const std::vector<S>& pvals, const State& s0,
         double t_end, const IntegrateOptions& opts, Trajectory& out) {
  RhsEval<S> rhs{tape, pvals, opts.den_guard, opts.cut_guard};
  Y6<S> y;
  for (int k = 0; k < 3; ++k) {
    if constexpr (std::is_same_v<S, long double>) {
      y.v[k] = s0.q[k].real();
      y.v[3 + k] = s0.v[k].real();
    } else {
      y.v[k] = s0.q[k];
      y.v[3 + k] = s0.v[k];
    }
  }
  auto record = [&](double tt, const Y6<S>& yy) {
    State s;
    s.t = tt;
    for (int k = 0; k < 3; ++k) {
      if constexpr (std::is_same_v<S, long double>) {
        s.q[k] = CState(yy.v[k], 0.0L);
        s.v[k] = CState(yy.v[3 + k], 0.0L);
      } else {
        s.q[k] = yy.v[k];
        s.v[k] = yy.v[3 + k];
      }
    }
    out.states.push_back(s);
  };
  double t = s0.t;
  record(t, y);
  const double h = opts.h;
  const double stage_tol = opts.stage_tol;
  const long nsteps = (long)std::ceil((t_end - s0.t) / h - 1e-12);
  Y6<S> k1, k2, k3, k4;
  for (long step = 0; step < nsteps; ++step) {
    double hs = std::min(h, t_end - t);
    if (hs <= 0) break;
    bool ok = rhs(t, y, k1) && rhs(t + hs / 2, y + k1.scaled(hs / 2), k2) &&
              rhs(t + hs / 2, y + k2.scaled(hs / 2), k3) &&
              rhs(t + hs, y + k3.scaled(hs), k4);
    if (!ok) {
      out.aborted = true;
      out.abort_reason = "singular evaluation";
      return;
    }
    // Stage disagreement ~ h * local Lipschitz scale; a large value means
    // the step cannot resolve the dynamics (singularity approach).
    double rough = (k4 + k3.scaled(-1)).norm() / (1.0 + k1.norm());
    if (rough > stage_tol) {
      out.aborted = true;
      out.abort_reason = "step not resolved (singularity approach)";
      return;
    }
    y = y + (k1 + k2.scaled(2) + k3.scaled(2) + k4).scaled(hs / 6);
    ++out.steps_taken;
    t = s0.t + (double)out.steps_taken * h;
    if (t > t_end) t = t_end;
    if (!std::isfinite(y.norm()) || y.norm() > opts.state_cap) {
      out.aborted = true;
      out.abort_reason = "state escaped";
      return;
    }
    if (out.steps_taken % opts.store_stride == 0 || step + 1 == nsteps)
      record(t, y);
  }
}

}  // namespace

std::array<Complex, 3> acceleration(const Expr& V, const ParamSet& params,
                                    const State& s) {
  auto g = grad(V);
  ex::Tape tape = ex::Tape::compile(g, params.names);
  Complex vars[7] = {Complex(s.t), Complex((double)s.q[0].real(), (double)s.q[0].imag()),
                     Complex((double)s.q[1].real(), (double)s.q[1].imag()),
                     Complex((double)s.q[2].real(), (double)s.q[2].imag()),
                     Complex((double)s.v[0].real(), (double)s.v[0].imag()),
                     Complex((double)s.v[1].real(), (double)s.v[1].imag()),
                     Complex((double)s.v[2].real(), (double)s.v[2].imag())};
  Complex out[3];
  auto st = tape.eval_ld(std::span<const Complex>(vars, 7), params.values,
                         std::span<Complex>(out, 3));
  if (st.domain_error)
    throw ex::EvalError("singular evaluation of the potential gradient");
  return {-out[0], -out[1], -out[2]};
}

Trajectory integrate(const Expr& V, const ParamSet& params, const State& s0,
                     double t_end, const IntegrateOptions& opts) {
  if (t_end <= s0.t) throw std::invalid_argument("t_end must exceed s0.t");
  Trajectory out;
  out.h = opts.h;
  auto g = grad(V);
  ex::Tape tape = ex::Tape::compile(g, params.names);

  bool real_ok = tape.is_real_safe();
  for (const Complex& p : params.values)
    if (p.imag() != 0.0) real_ok = false;
  for (int k = 0; k < 3; ++k)
    if (s0.q[k].imag() != 0.0L || s0.v[k].imag() != 0.0L) real_ok = false;

  if (real_ok) {
    std::vector<long double> pv(params.values.size());
    for (std::size_t k = 0; k < pv.size(); ++k) pv[k] = params.values[k].real();
    run<long double>(tape, pv, s0, t_end, opts, out);
  } else {
    std::vector<CState> pv(params.values.size());
    for (std::size_t k = 0; k < pv.size(); ++k)
      pv[k] = CState(params.values[k].real(), params.values[k].imag());
    run<CState>(tape, pv, s0, t_end, opts, out);
  }
  return out;
}

double drift(const Expr& I, const ParamSet& params, const Trajectory& traj) {
  if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
  ex::Tape tape = ex::Tape::compile(I, params.names);
  std::vector<CState> pv(params.values.size());
  for (std::size_t k = 0; k < pv.size(); ++k)
    pv[k] = CState(params.values[k].real(), params.values[k].imag());
  bool crossed = false;
  std::vector<Complex> prev_args, args;
  auto value = [&](const State& s) {
    CState vars[7] = {CState(s.t), s.q[0], s.q[1], s.q[2],
                      s.v[0],      s.v[1], s.v[2]};
    CState out;
    args.clear();
    auto st = tape.eval<CState>(std::span<const CState>(vars, 7), pv,
                                std::span<CState>(&out, 1), &args);
    if (st.domain_error || !std::isfinite((double)std::abs(out)))
      throw ex::EvalError("singular evaluation along trajectory");
    // Multivalued integrals are certified on the principal branch only.
    // A crossing shows up either as cut proximity at a sample or as the
    // argument of a branch operation jumping across the negative reals
    // between consecutive samples.
    if (st.min_cut < 1e-3) crossed = true;
    if (prev_args.size() == args.size()) {
      for (std::size_t k = 0; k < args.size(); ++k) {
        const Complex& a = prev_args[k];
        const Complex& b = args[k];
        if ((a.real() < 0.0 || b.real() < 0.0) &&
            std::signbit(a.imag()) != std::signbit(b.imag()))
          crossed = true;
      }
    }
    std::swap(prev_args, args);
    return out;
  };
  CState i0 = value(traj.states.front());
  if (crossed) return 0.0;
  long double scale = std::max<long double>(1.0L, std::abs(i0));
  long double worst = 0.0L;
  for (const State& s : traj.states) {
    CState v = value(s);
    if (crossed) break;
    worst = std::max(worst, std::abs(v - i0) / scale);
  }
  return (double)worst;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(15);
  os << "t,re_x,im_x,re_y,im_y,re_z,im_z,re_vx,im_vx,re_vy,im_vy,re_vz,im_vz\n";
  for (const State& s : traj.states) {
    os << s.t;
    for (int k = 0; k < 3; ++k)
      os << ',' << (double)s.q[k].real() << ',' << (double)s.q[k].imag();
    for (int k = 0; k < 3; ++k)
      os << ',' << (double)s.v[k].real() << ',' << (double)s.v[k].imag();
    os << '\n';
  }
  return os.str();
}

}  // namespace symfi::dyn
