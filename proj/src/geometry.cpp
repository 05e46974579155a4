#include "symfi/geometry.hpp"

#include <nlohmann/json.hpp>

namespace symfi::geom {

using ex::Expr;
using json = nlohmann::json;

namespace {
Expr C(double v) { return Expr::constant(v); }
Expr X() { return Expr::variable(1); }
Expr Y() { return Expr::variable(2); }
Expr Z() { return Expr::variable(3); }
}  // namespace

const Expr& SymTensorField::at(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i == 0) return j == 0 ? c11 : (j == 1 ? c12 : c13);
  if (i == 1) return j == 1 ? c22 : c23;
  return c33;
}

VectorField zero_vector() { return {{Expr(), Expr(), Expr()}}; }

VectorField killing_vector(const KvParams& p) {
  const auto& b = p.b;
  return {{C(b[0]) - C(b[3]) * Y() + C(b[4]) * Z(),
           C(b[1]) + C(b[3]) * X() - C(b[5]) * Z(),
           C(b[2]) - C(b[4]) * X() + C(b[5]) * Y()}};
}

std::array<Expr, 20> kt_symbol_array() {
  std::array<Expr, 20> a;
  for (int k = 0; k < 20; ++k)
    a[k] = Expr::parameter("a" + std::to_string(k + 1));
  return a;
}

namespace {
std::array<Expr, 20> to_exprs(const KtParams& p) {
  std::array<Expr, 20> a;
  for (int k = 0; k < 20; ++k) a[k] = Expr::constant(p.a[k]);
  return a;
}
}  // namespace

SymTensorField general_kt(const std::array<Expr, 20>& v) {
  auto a = [&](int k) -> const Expr& { return v[k - 1]; };
  Expr x = X(), y = Y(), z = Z();
  Expr half = C(0.5);
  SymTensorField t;
  t.c11 = half * a(6) * y * y + half * a(1) * z * z + a(4) * y * z +
          a(5) * y + a(2) * z + a(3);
  t.c12 = half * a(10) * z * z - half * a(6) * x * y - half * a(4) * x * z -
          half * a(14) * y * z - half * a(5) * x - half * a(15) * y +
          a(16) * z + a(17);
  t.c13 = half * a(14) * y * y - half * a(4) * x * y - half * a(1) * x * z -
          half * a(10) * y * z - half * a(2) * x + a(18) * y -
          half * a(11) * z + a(19);
  t.c22 = half * a(6) * x * x + half * a(7) * z * z + a(14) * x * z +
          a(15) * x + a(12) * z + a(13);
  t.c23 = half * a(4) * x * x - half * a(14) * x * y - half * a(10) * x * z -
          half * a(7) * y * z - (a(16) + a(18)) * x - half * a(12) * y -
          half * a(8) * z + a(20);
  t.c33 = half * a(1) * x * x + half * a(7) * y * y + a(10) * x * y +
          a(11) * x + a(8) * y + a(9);
  return t;
}

SymTensorField general_kt(const KtParams& p) { return general_kt(to_exprs(p)); }

VectorField reducible_vector(const std::array<Expr, 20>& v) {
  auto a = [&](int k) -> const Expr& { return v[k - 1]; };
  Expr x = X(), y = Y(), z = Z();
  Expr two = C(2.0);
  VectorField L;
  L.comp[0] = -a(15) * y * y - a(11) * z * z + a(5) * x * y + a(2) * x * z +
              two * (a(16) + a(18)) * y * z + a(3) * x + two * a(4) * y +
              two * a(1) * z + a(6);
  L.comp[1] = -a(5) * x * x - a(8) * z * z + a(15) * x * y -
              two * a(18) * x * z + a(12) * y * z + two * (a(17) - a(4)) * x +
              a(13) * y + two * a(7) * z + a(14);
  L.comp[2] = -a(2) * x * x - a(12) * y * y - two * a(16) * x * y +
              a(11) * x * z + a(8) * y * z + two * (a(19) - a(1)) * x +
              two * (a(20) - a(7)) * y + a(9) * z + a(10);
  return L;
}

VectorField reducible_vector(const KtParams& p) {
  return reducible_vector(to_exprs(p));
}

SymTensorField sym_gradient(const VectorField& L) {
  auto d = [&](int comp, int var) { return L.comp[comp].diff(var + 1); };
  Expr half = C(0.5);
  SymTensorField t;
  t.c11 = d(0, 0);
  t.c22 = d(1, 1);
  t.c33 = d(2, 2);
  t.c12 = half * (d(0, 1) + d(1, 0));
  t.c13 = half * (d(0, 2) + d(2, 0));
  t.c23 = half * (d(1, 2) + d(2, 1));
  return t;
}

SymTensorField add(const SymTensorField& A, const SymTensorField& B) {
  return {A.c11 + B.c11, A.c12 + B.c12, A.c13 + B.c13,
          A.c22 + B.c22, A.c23 + B.c23, A.c33 + B.c33};
}

SymTensorField scale(const SymTensorField& A, const Expr& s) {
  return {s * A.c11, s * A.c12, s * A.c13, s * A.c22, s * A.c23, s * A.c33};
}

bool is_killing_tensor(const SymTensorField& C, std::span<const Point7> samples,
                       const ParamSet& params, double tol,
                       double* max_residual) {
  // S_abc = d_(c C_ab): ten independent fully symmetric components.
  std::vector<Expr> conds;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b)
      for (int c = b; c < 3; ++c) {
        Expr s = C.at(a, b).diff(c + 1) + C.at(b, c).diff(a + 1) +
                 C.at(c, a).diff(b + 1);
        conds.push_back(s);
      }
  ex::Tape tape = ex::Tape::compile(conds, params.names);
  std::vector<Complex> out(conds.size());
  double worst = 0.0;
  for (const Point7& p : samples) {
    tape.eval_ld(std::span<const Complex>(p.data(), 7), params.values, out);
    for (const Complex& v : out) worst = std::max(worst, std::abs(v));
  }
  if (max_residual) *max_residual = worst;
  return worst <= tol;
}

std::string kt_to_json(const KtParams& p) {
  json j = json::object();
  for (int k = 0; k < 20; ++k)
    j["a" + std::to_string(k + 1)] = {p.a[k].real(), p.a[k].imag()};
  return j.dump();
}

KtParams kt_from_json(const std::string& text) {
  json j = json::parse(text);
  KtParams p;
  for (int k = 0; k < 20; ++k) {
    auto it = j.find("a" + std::to_string(k + 1));
    if (it != j.end()) p.a[k] = Complex((*it)[0], (*it)[1]);
  }
  return p;
}

std::string kv_to_json(const KvParams& p) {
  json j = json::object();
  for (int k = 0; k < 6; ++k) j["b" + std::to_string(k + 1)] = p.b[k];
  return j.dump();
}

KvParams kv_from_json(const std::string& text) {
  json j = json::parse(text);
  KvParams p;
  for (int k = 0; k < 6; ++k) {
    auto it = j.find("b" + std::to_string(k + 1));
    if (it != j.end()) p.b[k] = *it;
  }
  return p;
}

}  // namespace symfi::geom
