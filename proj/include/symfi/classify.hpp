#pragma once

#include <span>
#include <string>
#include <vector>

#include "symfi/poisson.hpp"
#include "symfi/qfi.hpp"

namespace symfi::classify {

using ex::Expr;

enum class Verdict {
  NotEstablished,
  Integrable,
  MinimallySuperintegrable,
  MaximallySuperintegrable
};

const char* verdict_name(Verdict v);

struct Classification {
  Verdict verdict = Verdict::NotEstablished;
  std::vector<int> involutive_triple;  // indices of the witness, empty if none
  std::vector<int> independent_set;    // indices of a maximal independent set
  int rank_all = 0;
  std::vector<std::vector<double>> bracket_matrix;  // pairwise max |{Ii,Ij}|
  std::string to_json() const;
};

/// Numerical rank of the Jacobian d(I_1..I_k)/d(t,q,v): max over samples of
/// the count of singular values above svd_tol times the largest.
int jacobian_rank(std::span<const Expr> fis, const ParamSet& params,
                  std::span<const Point7> samples, double svd_tol = 1e-8);

struct ClassifyOptions {
  double svd_tol = 1e-8;
  double bracket_tol = 1e-8;
  int max_subset = 6;
};

/// Liouville-style classification from a verified FI list (H included by the
/// caller): integrable iff some independent 3-subset is pairwise in
/// involution; minimal/maximal by the total independent count (4 / 5+).
Classification classify_set(std::span<const Expr> fis, const ParamSet& params,
                            std::span<const Point7> samples,
                            const ClassifyOptions& opts = {});

/// |lhs - rhs| <= tol at all regular samples.
bool verify_relation(const Expr& lhs, const Expr& rhs, const ParamSet& params,
                     std::span<const Point7> samples, double tol,
                     double* max_dev = nullptr);

}  // namespace symfi::classify
