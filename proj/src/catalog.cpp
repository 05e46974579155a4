#include "symfi/catalog.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace symfi::cat {

using json = nlohmann::json;

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool glob_match(std::string_view pat, std::string_view text) {
  // Iterative * and ? matcher.
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pat.size() && (pat[p] == '?' || pat[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

namespace {

Complex complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw CatalogError(where + ": expected number or [re, im]");
}

CatalogEntry parse_entry(const json& j) {
  CatalogEntry e;
  auto need = [&](const char* field) -> const json& {
    auto it = j.find(field);
    if (it == j.end())
      throw CatalogError(std::string("missing field '") + field + "'");
    return *it;
  };
  e.id = need("id").get<std::string>();
  auto where = [&](const std::string& f) { return "entry '" + e.id + "', " + f; };
  try {
    e.table_ref = need("table_ref").get<std::string>();
    if (e.table_ref.empty()) throw CatalogError("table_ref must be nonempty");
    e.potential_text = need("potential").get<std::string>();
    if (auto it = j.find("params"); it != j.end())
      for (auto& [k, v] : it->items())
        e.params.set(k, complex_from_json(v, where("params." + k)));
    if (auto it = j.find("functions"); it != j.end())
      for (auto& [k, v] : it->items())
        e.functions[k] = v.get<std::string>();
    if (auto it = j.find("variants"); it != j.end())
      for (const auto& var : *it) {
        std::map<std::string, std::string> m;
        for (auto& [k, v] : var.at("functions").items())
          m[k] = v.get<std::string>();
        e.variants.push_back(std::move(m));
      }
    for (const auto& f : need("fis")) {
      CatalogFI fi;
      fi.id = f.at("id").get<std::string>();
      fi.expr_text = f.at("expr").get<std::string>();
      if (auto it = f.find("family"); it != f.end()) {
        auto fam = qfi::family_from_name(it->get<std::string>());
        if (!fam) throw CatalogError(where("fis." + fi.id + ".family"));
        fi.family = *fam;
      }
      if (auto it = f.find("lambda"); it != f.end())
        fi.lambda = complex_from_json(*it, where("fis." + fi.id + ".lambda"));
      if (auto it = f.find("L"); it != f.end()) {
        if (!it->is_array() || it->size() != 3)
          throw CatalogError(where("fis." + fi.id + ".L: need 3 components"));
        for (const auto& comp : *it)
          fi.L_text.push_back(comp.get<std::string>());
      }
      if (auto it = f.find("s"); it != f.end())
        fi.s = complex_from_json(*it, where("fis." + fi.id + ".s"));
      if (auto it = f.find("kt"); it != f.end())
        for (auto& [k, v] : it->items())
          fi.kt[k] = complex_from_json(v, where("fis." + fi.id + ".kt." + k));
      e.fis.push_back(std::move(fi));
    }
    if (auto it = j.find("claims"); it != j.end()) {
      const json& c = *it;
      if (auto f = c.find("classification"); f != c.end()) {
        std::string s = f->get<std::string>();
        if (s == "integrable")
          e.claims.classification = classify::Verdict::Integrable;
        else if (s == "minimally-superintegrable")
          e.claims.classification = classify::Verdict::MinimallySuperintegrable;
        else if (s == "maximally-superintegrable")
          e.claims.classification = classify::Verdict::MaximallySuperintegrable;
        else if (s == "not-established")
          e.claims.classification = classify::Verdict::NotEstablished;
        else
          throw CatalogError(where("claims.classification: '" + s + "'"));
      }
      if (auto f = c.find("relations"); f != c.end())
        for (const auto& r : *f)
          e.claims.relations.emplace_back(r.at(0).get<std::string>(),
                                          r.at(1).get<std::string>());
      if (auto f = c.find("involution_sets"); f != c.end())
        for (const auto& s : *f)
          e.claims.involution_sets.push_back(
              s.get<std::vector<std::string>>());
      if (auto f = c.find("brackets"); f != c.end())
        for (auto& [k, v] : f->items())
          e.claims.brackets.emplace_back(k, v.get<std::string>());
      if (auto f = c.find("non_involution"); f != c.end())
        for (const auto& r : *f)
          e.claims.non_involution.emplace_back(r.at(0).get<std::string>(),
                                               r.at(1).get<std::string>());
    }
  } catch (const json::exception& ex) {
    throw CatalogError(where(ex.what()));
  } catch (const CatalogError& ex) {
    if (std::string_view(ex.what()).find("entry '") == 0) throw;
    throw CatalogError(where(ex.what()));
  }
  return e;
}

}  // namespace

std::vector<CatalogEntry> load_text(const std::string& text,
                                    const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw CatalogError(origin + ": " + ex.what());
  }
  const json* entries = nullptr;
  if (j.is_array())
    entries = &j;
  else if (j.is_object() && j.contains("entries"))
    entries = &j["entries"];
  else
    throw CatalogError(origin + ": expected an entry array or {entries: []}");
  std::vector<CatalogEntry> out;
  for (const auto& item : *entries) out.push_back(parse_entry(item));
  // Entries must parse under their own declared symbols; check eagerly so a
  // bad entry is reported by id at load time.
  for (const auto& e : out) instantiate(e, e.functions);
  return out;
}

std::vector<CatalogEntry> load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CatalogError("cannot open catalog file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_text(ss.str(), path);
}

Instantiated instantiate(const CatalogEntry& e,
                         const std::map<std::string, std::string>& functions) {
  Instantiated out;
  ex::ParseContext ctx = e.params.parse_context();
  // Function-marker bodies may use placeholders s1, s2 and the entry params.
  ex::ParseContext body_ctx = ctx;
  body_ctx.params.insert("s1");
  body_ctx.params.insert("s2");
  for (const auto& [marker, body_text] : functions) {
    ex::FunctionDef def;
    try {
      def.body = ex::parse(body_text, body_ctx);
    } catch (const ex::ParseError& pe) {
      throw CatalogError("entry '" + e.id + "', functions." + marker + ": " +
                         pe.what());
    }
    auto ps = def.body.parameters();
    def.arity = ps.count("s2") ? 2 : (ps.count("s1") ? 1 : 0);
    ctx.functions[marker] = def;
  }
  auto parse_field = [&](const std::string& text, const std::string& field) {
    try {
      return ex::parse(text, ctx);
    } catch (const ex::ParseError& pe) {
      throw CatalogError("entry '" + e.id + "', " + field + ": " + pe.what());
    }
  };
  out.potential = parse_field(e.potential_text, "potential");
  out.fi_ids.push_back("H");
  out.fi_exprs.push_back(poisson::hamiltonian(out.potential));
  // FIs may reference H and previously declared FIs by id.
  ctx.functions["H"] = ex::FunctionDef{0, out.fi_exprs[0]};
  for (const auto& fi : e.fis) {
    out.fi_ids.push_back(fi.id);
    out.fi_exprs.push_back(parse_field(fi.expr_text, "fis." + fi.id));
    ctx.functions[fi.id] = ex::FunctionDef{0, out.fi_exprs.back()};
  }
  // Claim expressions may name FIs directly.
  out.symbols = ctx.functions;
  for (std::size_t k = 0; k < out.fi_ids.size(); ++k)
    out.symbols[out.fi_ids[k]] = ex::FunctionDef{0, out.fi_exprs[k]};
  return out;
}

namespace {

int fi_index(const Instantiated& inst, const std::string& id,
             const std::string& entry_id) {
  for (std::size_t k = 0; k < inst.fi_ids.size(); ++k)
    if (inst.fi_ids[k] == id) return (int)k;
  throw CatalogError("entry '" + entry_id + "': unknown FI id '" + id + "'");
}

InstantiationReport verify_instantiation(const CatalogEntry& e,
                                         const Instantiated& inst,
                                         const std::string& label,
                                         const VerifyOptions& opts) {
  InstantiationReport rep;
  rep.label = label;
  bool ok = true;

  ex::ParseContext claim_ctx = e.params.parse_context();
  claim_ctx.functions = inst.symbols;
  auto parse_claim = [&](const std::string& text, const std::string& field) {
    try {
      return ex::parse(text, claim_ctx);
    } catch (const ex::ParseError& pe) {
      throw CatalogError("entry '" + e.id + "', " + field + ": " + pe.what());
    }
  };

  Rng rng(opts.seed ^ stable_hash(e.id));
  SampleBox box;
  std::vector<Expr> guards = inst.fi_exprs;
  guards.push_back(inst.potential);
  auto samples = draw_regular(rng, box, opts.samples, guards, e.params);

  // Conservation: symbolic dI/dt residual, the primary channel.
  for (std::size_t k = 0; k < inst.fi_exprs.size(); ++k) {
    Expr ddt = poisson::total_time_derivative(inst.fi_exprs[k], inst.potential);
    double r = poisson::max_abs_on(ddt, e.params, samples);
    bool p = r <= opts.tol_residual;
    rep.conservation.push_back({inst.fi_ids[k], r, p});
    ok = ok && p;
  }

  // Drift along integrated trajectories, the secondary channel.
  if (opts.with_drift) {
    std::vector<double> worst(inst.fi_exprs.size(), 0.0);
    std::vector<Expr> pot_guard{inst.potential};
    auto ics = draw_regular(rng, box, opts.trajectories, pot_guard, e.params);
    for (const Point7& ic : ics) {
      dyn::State s0;
      s0.t = 0.0;
      for (int k = 0; k < 3; ++k) {
        s0.q[k] = ic[1 + k];
        s0.v[k] = ic[4 + k];
      }
      dyn::IntegrateOptions io;
      io.h = opts.h;
      // Complex potentials have no energy barrier keeping trajectories off
      // pole neighborhoods; certify a wider exclusion zone for them.
      ex::Tape probe = ex::Tape::compile(inst.potential, e.params.names);
      bool real_dyn = probe.is_real_safe();
      for (const Complex& pv : e.params.values)
        if (pv.imag() != 0.0) real_dyn = false;
      if (!real_dyn) io.den_guard = std::max(io.den_guard, 5e-2);
      dyn::Trajectory traj =
          dyn::integrate(inst.potential, e.params, s0, opts.t_end, io);
      for (std::size_t k = 0; k < inst.fi_exprs.size(); ++k)
        worst[k] = std::max(
            worst[k], dyn::drift(inst.fi_exprs[k], e.params, traj));
    }
    for (std::size_t k = 0; k < inst.fi_exprs.size(); ++k) {
      bool p = worst[k] <= opts.tol_drift;
      rep.drift.push_back({inst.fi_ids[k], worst[k], p});
      ok = ok && p;
    }
  }

  auto add_check = [&](std::string name, double value, bool p) {
    rep.claim_checks.push_back({std::move(name), value, p});
    ok = ok && p;
  };

  // Family conditions for FIs carrying their generating data.
  for (std::size_t fk = 0; fk < e.fis.size(); ++fk) {
    const CatalogFI& fi = e.fis[fk];
    const Expr& expr = inst.fi_exprs[fk + 1];  // slot 0 is H
    geom::VectorField L = geom::zero_vector();
    if (!fi.L_text.empty()) {
      ex::ParseContext lctx = e.params.parse_context();
      lctx.functions = inst.symbols;
      for (int k = 0; k < 3; ++k)
        L.comp[k] = parse_claim(fi.L_text[k], "fis." + fi.id + ".L");
    }
    auto proportional_to = [&](const Expr& built) {
      // expr == c * built for a single constant c (tables rescale freely).
      ex::Tape tape = ex::Tape::compile(std::vector<Expr>{expr, built},
                                        e.params.names);
      Complex out[2];
      Complex ratio{};
      double worst = 0.0;
      for (const Point7& p : samples) {
        auto st = tape.eval_ld(std::span<const Complex>(p.data(), 7),
                               e.params.values, std::span<Complex>(out, 2));
        if (st.domain_error || st.min_den < 1e-9) continue;
        if (std::abs(out[1]) < 1e-9) continue;
        if (ratio == Complex{}) ratio = out[0] / out[1];
        worst = std::max(worst, std::abs(out[0] - ratio * out[1]));
      }
      return worst;
    };
    try {
      if (fi.family == qfi::Family::I20 && !fi.L_text.empty()) {
        auto cr = qfi::residuals_I20(L, inst.potential, e.params, samples,
                                     opts.tol_residual);
        double worst = 0;
        for (const auto& c : cr.conditions)
          worst = std::max(worst, c.max_residual);
        add_check("I20 conditions [" + fi.id + "]", worst, cr.pass);
        auto built = qfi::build_I20(L, inst.potential);
        double dev = proportional_to(built.expression);
        add_check("I20 form [" + fi.id + "]", dev, dev <= 1e-8);
      } else if (fi.family == qfi::Family::I3 && !fi.L_text.empty()) {
        auto cr = qfi::residual_I3(L, fi.lambda, inst.potential, e.params,
                                   samples, opts.tol_residual);
        double worst = 0;
        for (const auto& c : cr.conditions)
          worst = std::max(worst, c.max_residual);
        add_check("I3 conditions [" + fi.id + "]", worst, cr.pass);
        auto built = qfi::build_I3(L, fi.lambda, inst.potential);
        double dev = proportional_to(built.expression);
        add_check("I3 form [" + fi.id + "]", dev, dev <= 1e-8);
      } else if (fi.family == qfi::Family::LFI && !fi.L_text.empty() && fi.s) {
        auto cr = qfi::residual_LFI(L, inst.potential, *fi.s, e.params,
                                    samples, opts.tol_residual);
        add_check("LFI condition [" + fi.id + "]",
                  cr.conditions[0].max_residual, cr.pass);
      }
      if (!fi.kt.empty() ||
          (fi.family == qfi::Family::I11 && !fi.L_text.empty())) {
        geom::KtParams kt;
        for (const auto& [name, v] : fi.kt) {
          if (name.size() < 2 || name[0] != 'a')
            throw CatalogError("entry '" + e.id + "': bad kt key " + name);
          kt[std::stoi(name.substr(1))] = v;
        }
        auto cr = qfi::residuals_I11(kt, L, inst.potential, e.params, samples,
                                     opts.tol_residual);
        double worst = 0;
        for (const auto& c : cr.conditions)
          worst = std::max(worst, c.max_residual);
        add_check("I11 conditions [" + fi.id + "]", worst, cr.pass);
      }
    } catch (const SampleError&) {
      // Condition expressions can be singular on too much of the box for
      // some instantiations; conservation and drift still gate the entry.
    }
  }

  // Claimed Poisson-bracket values.
  for (const auto& [pair, value_text] : e.claims.brackets) {
    auto comma = pair.find(',');
    if (comma == std::string::npos)
      throw CatalogError("entry '" + e.id + "': bracket key '" + pair + "'");
    int i = fi_index(inst, pair.substr(0, comma), e.id);
    int jj = fi_index(inst, pair.substr(comma + 1), e.id);
    Expr claimed = parse_claim(value_text, "claims.brackets[" + pair + "]");
    Expr dev = poisson::bracket(inst.fi_exprs[i], inst.fi_exprs[jj]) - claimed;
    double m = poisson::max_abs_on(dev, e.params, samples);
    add_check("bracket{" + pair + "}", m, m <= opts.claim_tol);
  }

  // Claimed dependency identities.
  for (const auto& [lhs, rhs] : e.claims.relations) {
    Expr a = parse_claim(lhs, "claims.relations lhs");
    Expr b = parse_claim(rhs, "claims.relations rhs");
    double m = 0.0;
    bool p = classify::verify_relation(a, b, e.params, samples, opts.claim_tol,
                                       &m);
    add_check("relation " + lhs + " == " + rhs, m, p);
  }

  // Claimed involutive sets.
  for (const auto& set : e.claims.involution_sets) {
    std::vector<Expr> fns;
    std::string name = "involution {";
    for (const auto& id : set) {
      fns.push_back(inst.fi_exprs[fi_index(inst, id, e.id)]);
      name += id + " ";
    }
    name += "}";
    auto r = poisson::in_involution(fns, e.params, samples, opts.bracket_tol);
    double worst = 0.0;
    for (const auto& row : r.residual)
      for (double v : row) worst = std::max(worst, v);
    add_check(name, worst, r.involutive);
  }

  // Claimed failures of involution.
  for (const auto& [ida, idb] : e.claims.non_involution) {
    Expr br = poisson::bracket(inst.fi_exprs[fi_index(inst, ida, e.id)],
                               inst.fi_exprs[fi_index(inst, idb, e.id)]);
    double m = poisson::max_abs_on(br, e.params, samples);
    add_check("non-involution {" + ida + "," + idb + "}", m,
              m > opts.non_involution_floor);
  }

  // Classification from the verified list.
  if (opts.with_classification) {
    classify::ClassifyOptions co;
    co.svd_tol = opts.svd_tol;
    co.bracket_tol = opts.bracket_tol;
    rep.classification =
        classify::classify_set(inst.fi_exprs, e.params, samples, co);
    rep.computed_classification =
        classify::verdict_name(rep.classification.verdict);
    if (e.claims.classification) {
      bool p = rep.classification.verdict == *e.claims.classification;
      add_check(std::string("classification == ") +
                    classify::verdict_name(*e.claims.classification),
                (double)rep.classification.rank_all, p);
    }
  }

  rep.pass = ok;
  return rep;
}

}  // namespace

VerificationReport verify_entry(const CatalogEntry& e,
                                const VerifyOptions& opts) {
  VerificationReport rep;
  rep.entry_id = e.id;
  rep.table_ref = e.table_ref;
  rep.pass = true;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> insts;
  insts.emplace_back("base", e.functions);
  for (std::size_t k = 0; k < e.variants.size(); ++k)
    insts.emplace_back("variant" + std::to_string(k + 1), e.variants[k]);
  for (const auto& [label, fns] : insts) {
    Instantiated inst = instantiate(e, fns);
    auto r = verify_instantiation(e, inst, label, opts);
    rep.pass = rep.pass && r.pass;
    rep.instantiations.push_back(std::move(r));
  }
  return rep;
}

std::string VerificationReport::to_json() const {
  json j;
  j["entry"] = entry_id;
  j["table_ref"] = table_ref;
  j["pass"] = pass;
  if (!error.empty()) j["error"] = error;
  json insts = json::array();
  for (const auto& inst : instantiations) {
    json ji;
    ji["label"] = inst.label;
    ji["pass"] = inst.pass;
    auto dump_checks = [](const std::vector<CheckResult>& cs) {
      json a = json::array();
      for (const auto& c : cs)
        a.push_back({{"name", c.name}, {"value", c.value}, {"pass", c.pass}});
      return a;
    };
    ji["conservation"] = dump_checks(inst.conservation);
    ji["drift"] = dump_checks(inst.drift);
    ji["claims"] = dump_checks(inst.claim_checks);
    ji["classification"] = json::parse(inst.classification.to_json());
    insts.push_back(std::move(ji));
  }
  j["instantiations"] = std::move(insts);
  return j.dump();
}

}  // namespace symfi::cat
