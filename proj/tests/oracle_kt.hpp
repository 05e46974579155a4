#pragma once

// Test-side oracle for the size of the admissible-KT space of a potential.
//
// Independent route: Laurent-polynomial arithmetic with exact coefficient
// matching. For W_a = 2 C_ab dV/dq^b with the twenty-parameter KT carried
// as linear forms in (a1..a20), the existence of G with grad G = W is
// equivalent to curl W = 0; matching every monomial coefficient of the
// three curl components to zero yields a linear system over the a's whose
// kernel dimension is computed by Gaussian elimination. No expression
// trees, sampling, or SVD are involved.

#include <array>
#include <cmath>
#include <map>
#include <vector>

namespace oracle {

using Exponent = std::array<int, 3>;
using LinForm = std::array<double, 20>;  // coefficients of a1..a20

// Laurent polynomial with scalar coefficients.
struct Poly {
  std::map<Exponent, double> terms;
  void add(Exponent e, double c) {
    if (c == 0.0) return;
    auto [it, fresh] = terms.emplace(e, c);
    if (!fresh && (it->second += c) == 0.0) terms.erase(it);
  }
};

// Laurent polynomial whose coefficients are linear forms in a1..a20.
struct LinPoly {
  std::map<Exponent, LinForm> terms;
  void add(Exponent e, int param1, double c) {  // c * a_param1 * monomial
    if (c == 0.0) return;
    LinForm& f = terms[e];
    f[param1 - 1] += c;
  }
  void add(Exponent e, const LinForm& f) {
    LinForm& g = terms[e];
    for (int k = 0; k < 20; ++k) g[k] += f[k];
  }
};

inline Poly dpoly(const Poly& p, int axis) {
  Poly out;
  for (const auto& [e, c] : p.terms) {
    if (e[axis] == 0) continue;
    Exponent d = e;
    d[axis] -= 1;
    out.add(d, c * e[axis]);
  }
  return out;
}

inline LinPoly dlin(const LinPoly& p, int axis) {
  LinPoly out;
  for (const auto& [e, f] : p.terms) {
    if (e[axis] == 0) continue;
    Exponent d = e;
    d[axis] -= 1;
    LinForm g;
    for (int k = 0; k < 20; ++k) g[k] = f[k] * e[axis];
    out.add(d, g);
  }
  return out;
}

inline LinPoly mul(const LinPoly& a, const Poly& b) {
  LinPoly out;
  for (const auto& [ea, fa] : a.terms)
    for (const auto& [eb, cb] : b.terms) {
      Exponent e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
      LinForm g;
      for (int k = 0; k < 20; ++k) g[k] = fa[k] * cb;
      out.add(e, g);
    }
  return out;
}

// The general second-order Killing tensor, transcribed here on its own so
// the production transcription is cross-checked rather than reused.
inline std::array<std::array<LinPoly, 3>, 3> kt_linear() {
  std::array<std::array<LinPoly, 3>, 3> C;
  auto& c = C;
  auto E = [](int i, int j, int k) { return Exponent{i, j, k}; };
  // C11 = a6/2 y^2 + a1/2 z^2 + a4 y z + a5 y + a2 z + a3
  c[0][0].add(E(0, 2, 0), 6, 0.5);
  c[0][0].add(E(0, 0, 2), 1, 0.5);
  c[0][0].add(E(0, 1, 1), 4, 1.0);
  c[0][0].add(E(0, 1, 0), 5, 1.0);
  c[0][0].add(E(0, 0, 1), 2, 1.0);
  c[0][0].add(E(0, 0, 0), 3, 1.0);
  // C12 = a10/2 z^2 - a6/2 x y - a4/2 x z - a14/2 y z - a5/2 x - a15/2 y
  //       + a16 z + a17
  c[0][1].add(E(0, 0, 2), 10, 0.5);
  c[0][1].add(E(1, 1, 0), 6, -0.5);
  c[0][1].add(E(1, 0, 1), 4, -0.5);
  c[0][1].add(E(0, 1, 1), 14, -0.5);
  c[0][1].add(E(1, 0, 0), 5, -0.5);
  c[0][1].add(E(0, 1, 0), 15, -0.5);
  c[0][1].add(E(0, 0, 1), 16, 1.0);
  c[0][1].add(E(0, 0, 0), 17, 1.0);
  // C13 = a14/2 y^2 - a4/2 x y - a1/2 x z - a10/2 y z - a2/2 x + a18 y
  //       - a11/2 z + a19
  c[0][2].add(E(0, 2, 0), 14, 0.5);
  c[0][2].add(E(1, 1, 0), 4, -0.5);
  c[0][2].add(E(1, 0, 1), 1, -0.5);
  c[0][2].add(E(0, 1, 1), 10, -0.5);
  c[0][2].add(E(1, 0, 0), 2, -0.5);
  c[0][2].add(E(0, 1, 0), 18, 1.0);
  c[0][2].add(E(0, 0, 1), 11, -0.5);
  c[0][2].add(E(0, 0, 0), 19, 1.0);
  // C22 = a6/2 x^2 + a7/2 z^2 + a14 x z + a15 x + a12 z + a13
  c[1][1].add(E(2, 0, 0), 6, 0.5);
  c[1][1].add(E(0, 0, 2), 7, 0.5);
  c[1][1].add(E(1, 0, 1), 14, 1.0);
  c[1][1].add(E(1, 0, 0), 15, 1.0);
  c[1][1].add(E(0, 0, 1), 12, 1.0);
  c[1][1].add(E(0, 0, 0), 13, 1.0);
  // C23 = a4/2 x^2 - a14/2 x y - a10/2 x z - a7/2 y z - (a16 + a18) x
  //       - a12/2 y - a8/2 z + a20
  c[1][2].add(E(2, 0, 0), 4, 0.5);
  c[1][2].add(E(1, 1, 0), 14, -0.5);
  c[1][2].add(E(1, 0, 1), 10, -0.5);
  c[1][2].add(E(0, 1, 1), 7, -0.5);
  c[1][2].add(E(1, 0, 0), 16, -1.0);
  c[1][2].add(E(1, 0, 0), 18, -1.0);
  c[1][2].add(E(0, 1, 0), 12, -0.5);
  c[1][2].add(E(0, 0, 1), 8, -0.5);
  c[1][2].add(E(0, 0, 0), 20, 1.0);
  // C33 = a1/2 x^2 + a7/2 y^2 + a10 x y + a11 x + a8 y + a9
  c[2][2].add(E(2, 0, 0), 1, 0.5);
  c[2][2].add(E(0, 2, 0), 7, 0.5);
  c[2][2].add(E(1, 1, 0), 10, 1.0);
  c[2][2].add(E(1, 0, 0), 11, 1.0);
  c[2][2].add(E(0, 1, 0), 8, 1.0);
  c[2][2].add(E(0, 0, 0), 9, 1.0);
  c[1][0] = c[0][1];
  c[2][0] = c[0][2];
  c[2][1] = c[1][2];
  return C;
}

/// Kernel dimension of the coefficient-matching system for curl(2 C grad V).
inline int nullspace_dim(const Poly& V) {
  auto C = kt_linear();
  std::array<Poly, 3> grad{dpoly(V, 0), dpoly(V, 1), dpoly(V, 2)};
  std::array<LinPoly, 3> W;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      LinPoly t = mul(C[a][b], grad[b]);
      for (const auto& [e, f] : t.terms) {
        LinForm g;
        for (int k = 0; k < 20; ++k) g[k] = 2.0 * f[k];
        W[a].add(e, g);
      }
    }
  // Three curl components; every monomial coefficient must vanish.
  std::vector<LinForm> rows;
  auto push_rows = [&](const LinPoly& p) {
    for (const auto& [e, f] : p.terms) {
      bool nonzero = false;
      for (double v : f)
        if (v != 0.0) nonzero = true;
      if (nonzero) rows.push_back(f);
    }
  };
  auto sub = [](const LinPoly& a, const LinPoly& b) {
    LinPoly out = a;
    for (const auto& [e, f] : b.terms) {
      LinForm g;
      for (int k = 0; k < 20; ++k) g[k] = -f[k];
      out.add(e, g);
    }
    return out;
  };
  push_rows(sub(dlin(W[1], 0), dlin(W[0], 1)));
  push_rows(sub(dlin(W[2], 0), dlin(W[0], 2)));
  push_rows(sub(dlin(W[2], 1), dlin(W[1], 2)));

  // Rank by Gaussian elimination with partial pivoting.
  int rank = 0;
  std::vector<LinForm> m = rows;
  for (int col = 0; col < 20 && rank < (int)m.size(); ++col) {
    int piv = -1;
    double best = 1e-9;
    for (int r = rank; r < (int)m.size(); ++r)
      if (std::fabs(m[r][col]) > best) {
        best = std::fabs(m[r][col]);
        piv = r;
      }
    if (piv < 0) continue;
    std::swap(m[rank], m[piv]);
    for (int r = 0; r < (int)m.size(); ++r) {
      if (r == rank || m[r][col] == 0.0) continue;
      double f = m[r][col] / m[rank][col];
      for (int k = 0; k < 20; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return 20 - rank;
}

}  // namespace oracle
