#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symfi/classify.hpp"
#include "symfi/integrator.hpp"
#include "symfi/qfi.hpp"

namespace symfi::cat {

using ex::Expr;

struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CatalogFI {
  std::string id;
  std::string expr_text;
  qfi::Family family = qfi::Family::Generic;
  Complex lambda{};
  // Optional generating data: enables the family condition checks and a
  // proportionality check against the family's normal form.
  std::vector<std::string> L_text;  // three components, or empty
  std::optional<Complex> s;         // LFI constant
  std::map<std::string, Complex> kt;  // "a1".."a20" slices, I11 conditions
};

struct Claims {
  std::optional<classify::Verdict> classification;
  std::vector<std::pair<std::string, std::string>> relations;
  std::vector<std::vector<std::string>> involution_sets;   // FI ids, "H" allowed
  std::vector<std::pair<std::string, std::string>> brackets;  // "A,B" -> value
  std::vector<std::pair<std::string, std::string>> non_involution;
};

struct CatalogEntry {
  std::string id;
  std::string table_ref;
  std::string potential_text;
  ParamSet params;
  std::map<std::string, std::string> functions;  // marker -> body (s1, s2 ...)
  std::vector<std::map<std::string, std::string>> variants;
  std::vector<CatalogFI> fis;
  Claims claims;
};

std::vector<CatalogEntry> load(const std::string& path);
std::vector<CatalogEntry> load_text(const std::string& text,
                                    const std::string& origin = "<memory>");

/// Instantiated view of an entry under one function-instantiation map.
struct Instantiated {
  Expr potential;
  std::vector<std::string> fi_ids;  // "H" first
  std::vector<Expr> fi_exprs;
  ex::FunctionTable symbols;  // markers + FI ids, for claim expressions
};

Instantiated instantiate(const CatalogEntry& e,
                         const std::map<std::string, std::string>& functions);

struct VerifyOptions {
  double tol_residual = 1e-10;
  double tol_drift = 1e-8;
  double svd_tol = 1e-8;
  double bracket_tol = 1e-8;
  double claim_tol = 1e-10;
  double non_involution_floor = 1e-3;
  int samples = 200;
  int trajectories = 5;
  double t_end = 10.0;
  double h = 1e-3;
  std::uint64_t seed = 42;
  bool with_drift = true;
  bool with_classification = true;
};

struct CheckResult {
  std::string name;
  double value = 0.0;
  bool pass = false;
};

struct InstantiationReport {
  std::string label;
  std::vector<CheckResult> conservation;  // per FI: |dI/dt| residual
  std::vector<CheckResult> drift;         // per FI: max drift over trajectories
  std::vector<CheckResult> claim_checks;
  classify::Classification classification;
  std::string computed_classification;
  bool pass = false;
};

struct VerificationReport {
  std::string entry_id;
  std::string table_ref;
  std::vector<InstantiationReport> instantiations;
  bool pass = false;
  std::string error;  // set when verification could not run
  std::string to_json() const;
};

VerificationReport verify_entry(const CatalogEntry& e,
                                const VerifyOptions& opts = {});

bool glob_match(std::string_view pattern, std::string_view text);

std::uint64_t stable_hash(std::string_view s);  // FNV-1a, for per-entry seeds

}  // namespace symfi::cat
