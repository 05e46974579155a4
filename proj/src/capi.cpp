#include "symfi/symfi.h"

#include <cstring>
#include <nlohmann/json.hpp>

#include "symfi/catalog.hpp"
#include "symfi/discovery.hpp"
#include "symfi/integrator.hpp"
#include "symfi/poisson.hpp"

using namespace symfi;
using json = nlohmann::json;

namespace {

thread_local std::string g_error;

char* dup_string(const std::string& s) {
  char* out = (char*)std::malloc(s.size() + 1);
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_error(const std::string& msg) { g_error = msg; }

Complex parse_complex_value(const std::string& text) {
  // "2", "-1.5", "2+3i", "-i", "0.5i"
  std::string s;
  for (char c : text)
    if (!std::isspace((unsigned char)c)) s += c;
  if (s.empty()) throw std::invalid_argument("empty numeric value");
  auto parse_num = [](const std::string& t, size_t& pos) {
    size_t used = 0;
    double v = std::stod(t.substr(pos), &used);
    pos += used;
    return v;
  };
  if (s == "i") return {0, 1};
  if (s == "-i") return {0, -1};
  size_t pos = 0;
  double first = parse_num(s, pos);
  if (pos == s.size()) return {first, 0};
  if (s[pos] == 'i' && pos + 1 == s.size()) return {0, first};
  if (s[pos] == '+' || s[pos] == '-') {
    if (s.substr(pos) == "+i") return {first, 1};
    if (s.substr(pos) == "-i") return {first, -1};
    double second = parse_num(s, pos);
    if (pos < s.size() && s[pos] == 'i' && pos + 1 == s.size())
      return {first, second};
  }
  throw std::invalid_argument("bad numeric value: " + text);
}

ParamSet parse_params_csv(const char* csv) {
  ParamSet ps;
  if (!csv || !*csv) return ps;
  std::string text(csv);
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected name=value: " + item);
    std::string name = item.substr(0, eq);
    while (!name.empty() && std::isspace((unsigned char)name.back()))
      name.pop_back();
    size_t ns = 0;
    while (ns < name.size() && std::isspace((unsigned char)name[ns])) ++ns;
    ps.set(name.substr(ns), parse_complex_value(item.substr(eq + 1)));
  }
  return ps;
}

cat::VerifyOptions to_verify_options(const symfi_options* o) {
  cat::VerifyOptions v;
  if (!o) return v;
  v.tol_residual = o->tol_residual;
  v.tol_drift = o->tol_drift;
  v.svd_tol = o->svd_tol;
  v.samples = o->samples;
  v.trajectories = o->trajectories;
  v.t_end = o->t_end;
  v.h = o->h;
  v.seed = o->seed;
  v.with_drift = o->with_drift != 0;
  v.with_classification = o->with_classification != 0;
  return v;
}

template <class F>
char* guarded(F&& f) {
  try {
    return dup_string(f());
  } catch (const ex::ParseError& e) {
    set_error(std::string("parse error: ") + e.what());
  } catch (const cat::CatalogError& e) {
    set_error(std::string("catalog error: ") + e.what());
  } catch (const std::exception& e) {
    set_error(e.what());
  }
  return nullptr;
}

}  // namespace

struct symfi_catalog {
  std::vector<cat::CatalogEntry> entries;
};

extern "C" {

int symfi_abi_version(void) { return SYMFI_ABI_VERSION; }

void symfi_options_init(symfi_options* o) {
  if (!o) return;
  cat::VerifyOptions d;
  o->tol_residual = d.tol_residual;
  o->tol_drift = d.tol_drift;
  o->svd_tol = d.svd_tol;
  o->samples = d.samples;
  o->trajectories = d.trajectories;
  o->t_end = d.t_end;
  o->h = d.h;
  o->seed = d.seed;
  o->with_drift = 1;
  o->with_classification = 1;
}

const char* symfi_last_error(void) { return g_error.c_str(); }

void symfi_string_free(char* s) { std::free(s); }

char* symfi_parse_canonical(const char* text, const char* params_csv) {
  return guarded([&] {
    if (!text) throw std::invalid_argument("null expression");
    ParamSet ps = parse_params_csv(params_csv);
    return ex::parse(text, ps.parse_context()).str();
  });
}

int symfi_eval(const char* text, const char* params_csv,
               const char* binding_csv, double* re, double* im) {
  try {
    if (!text || !re || !im) throw std::invalid_argument("null argument");
    ParamSet ps = parse_params_csv(params_csv);
    auto e = ex::parse(text, ps.parse_context());
    ex::Binding b = ps.binding();
    ParamSet vars = parse_params_csv(binding_csv);
    for (std::size_t k = 0; k < vars.names.size(); ++k)
      b.set(vars.names[k], vars.values[k]);
    Complex v = ex::eval(e, b);
    *re = v.real();
    *im = v.imag();
    return SYMFI_OK;
  } catch (const ex::ParseError& e) {
    set_error(e.what());
    return SYMFI_ERR_PARSE;
  } catch (const ex::EvalError& e) {
    set_error(e.what());
    return SYMFI_ERR_EVAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SYMFI_ERR_BAD_ARG;
  }
}

symfi_catalog* symfi_catalog_open(const char* path) {
  try {
    if (!path) throw std::invalid_argument("null path");
    auto c = std::make_unique<symfi_catalog>();
    c->entries = cat::load(path);
    return c.release();
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

void symfi_catalog_close(symfi_catalog* c) { delete c; }

int symfi_catalog_size(const symfi_catalog* c) {
  return c ? (int)c->entries.size() : -1;
}

char* symfi_catalog_ids(const symfi_catalog* c, const char* glob) {
  return guarded([&] {
    if (!c) throw std::invalid_argument("null catalog");
    std::string pat = glob && *glob ? glob : "*";
    std::string out;
    for (const auto& e : c->entries)
      if (cat::glob_match(pat, e.id)) {
        out += e.id;
        out += '\n';
      }
    return out;
  });
}

char* symfi_catalog_verify(const symfi_catalog* c, const char* glob,
                           const symfi_options* opts) {
  return guarded([&] {
    if (!c) throw std::invalid_argument("null catalog");
    std::string pat = glob && *glob ? glob : "*";
    cat::VerifyOptions vo = to_verify_options(opts);
    json entries = json::array();
    int passed = 0, failed = 0;
    for (const auto& e : c->entries) {
      if (!cat::glob_match(pat, e.id)) continue;
      cat::VerificationReport rep;
      try {
        rep = cat::verify_entry(e, vo);
      } catch (const std::exception& err) {
        rep.entry_id = e.id;
        rep.table_ref = e.table_ref;
        rep.pass = false;
        rep.error = err.what();
      }
      (rep.pass ? passed : failed) += 1;
      entries.push_back(json::parse(rep.to_json()));
    }
    json out{{"schema", 1},
             {"seed", vo.seed},
             {"tolerances",
              {{"residual", vo.tol_residual},
               {"drift", vo.tol_drift},
               {"svd", vo.svd_tol}}},
             {"entries", entries},
             {"summary",
              {{"total", passed + failed},
               {"passed", passed},
               {"failed", failed}}}};
    return out.dump(2);
  });
}

char* symfi_discover(const char* potential, const char* params_csv,
                     const symfi_options* opts) {
  return guarded([&] {
    if (!potential) throw std::invalid_argument("null potential");
    ParamSet ps = parse_params_csv(params_csv);
    auto V = ex::parse(potential, ps.parse_context());
    discover::DiscoverOptions dopts;
    if (opts) {
      dopts.samples = opts->samples > 0 ? std::max(opts->samples, 40) : 80;
      dopts.seed = opts->seed;
    }
    auto res = discover::discover(V, ps, dopts);
    json out = json::parse(res.to_json());
    out["seed"] = dopts.seed;
    out["potential"] = V.str();
    return out.dump(2);
  });
}

char* symfi_bracket(const char* expr_a, const char* expr_b,
                    const char* potential, const char* params_csv,
                    const char* claimed, const symfi_options* opts) {
  return guarded([&] {
    if (!expr_a || !expr_b) throw std::invalid_argument("null expression");
    ParamSet ps = parse_params_csv(params_csv);
    ex::ParseContext ctx = ps.parse_context();
    if (potential && *potential) {
      auto V = ex::parse(potential, ctx);
      ctx.functions["H"] = ex::FunctionDef{0, poisson::hamiltonian(V)};
    }
    auto A = ex::parse(expr_a, ctx);
    auto B = ex::parse(expr_b, ctx);
    std::uint64_t seed = opts ? opts->seed : 42;
    int nsamples = opts && opts->samples > 0 ? opts->samples : 200;
    Rng rng(seed);
    std::vector<ex::Expr> guards{A, B};
    auto samples = draw_regular(rng, SampleBox{}, nsamples, guards, ps);
    auto br = poisson::bracket(A, B);
    json out{{"schema", 1}, {"seed", seed}};
    out["max_abs_bracket"] = poisson::max_abs_on(br, ps, samples);
    if (claimed && *claimed) {
      auto want = ex::parse(claimed, ctx);
      out["claim_deviation"] = poisson::max_abs_on(br - want, ps, samples);
    }
    return out.dump(2);
  });
}

char* symfi_integrate_csv(const char* potential, const char* params_csv,
                          const double q0[3], const double v0[3], double t_end,
                          double h) {
  return guarded([&] {
    if (!potential || !q0 || !v0) throw std::invalid_argument("null argument");
    ParamSet ps = parse_params_csv(params_csv);
    auto V = ex::parse(potential, ps.parse_context());
    dyn::State s0;
    for (int k = 0; k < 3; ++k) {
      s0.q[k] = q0[k];
      s0.v[k] = v0[k];
    }
    dyn::IntegrateOptions io;
    if (h > 0) io.h = h;
    auto traj = dyn::integrate(V, ps, s0, t_end, io);
    std::string csv = dyn::trajectory_csv(traj);
    if (traj.aborted) csv += "# aborted: " + traj.abort_reason + "\n";
    return csv;
  });
}

char* symfi_drift_curve_csv(const symfi_catalog* c, const char* entry_id,
                            const char* fi_id, double t_end, double h,
                            unsigned long long seed) {
  return guarded([&] {
    if (!c || !entry_id || !fi_id) throw std::invalid_argument("null argument");
    const cat::CatalogEntry* entry = nullptr;
    for (const auto& e : c->entries)
      if (e.id == entry_id) entry = &e;
    if (!entry)
      throw std::invalid_argument(std::string("no such entry: ") + entry_id);
    auto inst = cat::instantiate(*entry, entry->functions);
    const ex::Expr* fi = nullptr;
    for (std::size_t k = 0; k < inst.fi_ids.size(); ++k)
      if (inst.fi_ids[k] == fi_id) fi = &inst.fi_exprs[k];
    if (!fi)
      throw std::invalid_argument(std::string("no such FI id: ") + fi_id);
    Rng rng(seed ^ cat::stable_hash(entry->id));
    std::vector<ex::Expr> guards{inst.potential};
    auto ic = draw_regular(rng, SampleBox{}, 1, guards, entry->params)[0];
    dyn::State s0;
    for (int k = 0; k < 3; ++k) {
      s0.q[k] = ic[1 + k];
      s0.v[k] = ic[4 + k];
    }
    dyn::IntegrateOptions io;
    if (h > 0) io.h = h;
    auto traj = dyn::integrate(inst.potential, entry->params, s0, t_end, io);
    ex::Tape tape = ex::Tape::compile(*fi, entry->params.names);
    std::vector<dyn::CState> pv(entry->params.values.size());
    for (std::size_t k = 0; k < pv.size(); ++k)
      pv[k] = dyn::CState(entry->params.values[k].real(),
                          entry->params.values[k].imag());
    auto value = [&](const dyn::State& s) {
      dyn::CState vars[7] = {dyn::CState(s.t), s.q[0], s.q[1], s.q[2],
                             s.v[0],           s.v[1], s.v[2]};
      dyn::CState out;
      tape.eval<dyn::CState>(std::span<const dyn::CState>(vars, 7), pv,
                             std::span<dyn::CState>(&out, 1));
      return out;
    };
    auto i0 = value(traj.states.front());
    std::string csv = "t,drift\n";
    char buf[64];
    for (const auto& s : traj.states) {
      double d = (double)std::abs(value(s) - i0);
      std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", s.t, d);
      csv += buf;
    }
    return csv;
  });
}

}  // extern "C"
