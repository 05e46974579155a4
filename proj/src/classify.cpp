#include "symfi/classify.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

namespace symfi::classify {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::NotEstablished: return "not-established";
    case Verdict::Integrable: return "integrable";
    case Verdict::MinimallySuperintegrable: return "minimally-superintegrable";
    case Verdict::MaximallySuperintegrable: return "maximally-superintegrable";
  }
  return "?";
}

namespace {

using Mat = Eigen::MatrixXcd;

/// Jacobian rows for every FI at every sample, flattened as per-sample
/// blocks. Columns are (t, x, y, z, vx, vy, vz).
std::vector<Mat> jacobians(std::span<const Expr> fis, const ParamSet& params,
                           std::span<const Point7> samples) {
  std::vector<Expr> rows;
  rows.reserve(fis.size() * 7);
  for (const Expr& f : fis)
    for (int v = 0; v < 7; ++v) rows.push_back(f.diff(v));
  ex::Tape tape = ex::Tape::compile(rows, params.names);
  std::vector<Complex> out(rows.size());
  std::vector<Mat> mats;
  for (const Point7& p : samples) {
    auto st = tape.eval_ld(std::span<const Complex>(p.data(), 7), params.values,
                           out);
    if (st.domain_error || st.min_den < 1e-3) continue;
    bool fin = true;
    for (const Complex& v : out)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fin = false;
    if (!fin) continue;
    Mat J(fis.size(), 7);
    for (std::size_t i = 0; i < fis.size(); ++i)
      for (int j = 0; j < 7; ++j) J((Eigen::Index)i, j) = out[i * 7 + j];
    mats.push_back(std::move(J));
  }
  if (mats.empty()) throw SampleError("all samples singular in jacobian_rank");
  return mats;
}

int rank_of(const Mat& J, double svd_tol) {
  Eigen::JacobiSVD<Mat> svd(J);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > svd_tol * s(0)) ++r;
  return r;
}

int rank_over(const std::vector<Mat>& mats, const std::vector<int>& subset,
              double svd_tol) {
  int best = 0;
  for (const Mat& J : mats) {
    Mat S((Eigen::Index)subset.size(), 7);
    for (std::size_t i = 0; i < subset.size(); ++i) S.row((Eigen::Index)i) = J.row(subset[i]);
    best = std::max(best, rank_of(S, svd_tol));
  }
  return best;
}

}  // namespace

int jacobian_rank(std::span<const Expr> fis, const ParamSet& params,
                  std::span<const Point7> samples, double svd_tol) {
  if (fis.empty()) throw std::invalid_argument("need at least one FI");
  auto mats = jacobians(fis, params, samples);
  int best = 0;
  for (const Mat& J : mats) best = std::max(best, rank_of(J, svd_tol));
  return best;
}

Classification classify_set(std::span<const Expr> fis, const ParamSet& params,
                            std::span<const Point7> samples,
                            const ClassifyOptions& opts) {
  Classification out;
  const int n = (int)fis.size();
  if (n == 0) return out;
  auto mats = jacobians(fis, params, samples);

  std::vector<int> all(n);
  for (int k = 0; k < n; ++k) all[k] = k;
  out.rank_all = rank_over(mats, all, opts.svd_tol);

  // Pairwise bracket residuals, computed once and kept for the report.
  std::vector<std::vector<double>> br(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      br[i][j] = br[j][i] = poisson::max_abs_on(
          poisson::bracket(fis[i], fis[j]), params, samples);
  out.bracket_matrix = br;

  // Witness: an independent pairwise-commuting triple.
  for (int i = 0; i < n && out.involutive_triple.empty(); ++i)
    for (int j = i + 1; j < n && out.involutive_triple.empty(); ++j) {
      if (br[i][j] > opts.bracket_tol) continue;
      for (int k = j + 1; k < n; ++k) {
        if (br[i][k] > opts.bracket_tol || br[j][k] > opts.bracket_tol)
          continue;
        std::vector<int> triple{i, j, k};
        if (rank_over(mats, triple, opts.svd_tol) == 3) {
          out.involutive_triple = triple;
          break;
        }
      }
    }

  // Greedy maximal independent set, for the report.
  std::vector<int> ind;
  for (int k = 0; k < n && (int)ind.size() < opts.max_subset; ++k) {
    std::vector<int> cand = ind;
    cand.push_back(k);
    if (rank_over(mats, cand, opts.svd_tol) == (int)cand.size()) ind = cand;
  }
  out.independent_set = ind;

  if (out.involutive_triple.empty()) {
    out.verdict = Verdict::NotEstablished;
  } else if (out.rank_all >= 5) {
    out.verdict = Verdict::MaximallySuperintegrable;
  } else if (out.rank_all == 4) {
    out.verdict = Verdict::MinimallySuperintegrable;
  } else {
    out.verdict = Verdict::Integrable;
  }
  return out;
}

bool verify_relation(const Expr& lhs, const Expr& rhs, const ParamSet& params,
                     std::span<const Point7> samples, double tol,
                     double* max_dev) {
  double m = poisson::max_abs_on(lhs - rhs, params, samples);
  if (max_dev) *max_dev = m;
  return m <= tol;
}

std::string Classification::to_json() const {
  nlohmann::json j;
  j["verdict"] = verdict_name(verdict);
  j["involutive_triple"] = involutive_triple;
  j["independent_set"] = independent_set;
  j["rank_all"] = rank_all;
  j["bracket_matrix"] = bracket_matrix;
  return j.dump();
}

}  // namespace symfi::classify
