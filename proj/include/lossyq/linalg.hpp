#pragma once

// Small complex linear algebra for one- and two-qubit objects: 2-vectors,
// 2x2 and 4x4 complex matrices, a closed-form Hermitian eigendecomposition,
// and the ancilla partial trace. Everything is a plain value type.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace lossyq {

using Cx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------- Ket2

/// Two-component complex vector; a qubit state when normalized.
/// c0 and c1 are the amplitudes on |0> and |1>.
struct Ket2 {
  Cx c0{};
  Cx c1{};
};

inline Ket2 operator+(const Ket2& u, const Ket2& v) { return {u.c0 + v.c0, u.c1 + v.c1}; }
inline Ket2 operator-(const Ket2& u, const Ket2& v) { return {u.c0 - v.c0, u.c1 - v.c1}; }
inline Ket2 operator*(Cx s, const Ket2& v) { return {s * v.c0, s * v.c1}; }

/// <u|v>, conjugating the left argument.
inline Cx inner(const Ket2& u, const Ket2& v) {
  return std::conj(u.c0) * v.c0 + std::conj(u.c1) * v.c1;
}

inline double norm_sq(const Ket2& v) { return std::norm(v.c0) + std::norm(v.c1); }
inline double norm(const Ket2& v) { return std::sqrt(norm_sq(v)); }

inline bool is_normalized(const Ket2& v, double tol = 1e-10) {
  return std::abs(norm_sq(v) - 1.0) <= tol;
}

inline Ket2 normalized(const Ket2& v) {
  const double n = norm(v);
  if (n == 0.0) throw std::invalid_argument("cannot normalize a zero vector");
  return (Cx{1.0 / n, 0.0}) * v;
}

/// Rephases v so its |0>-component is real and >= 0. If that component's
/// magnitude is below 1e-14, the |1>-component is made real >= 0 instead.
/// The pivot component is set to its magnitude outright, which makes the
/// operation exactly idempotent.
inline Ket2 canonical_phase(const Ket2& v) {
  const bool pivot0 = std::abs(v.c0) >= 1e-14;
  const Cx& pivot = pivot0 ? v.c0 : v.c1;
  const double mag = std::abs(pivot);
  if (mag == 0.0) return v;
  const Cx ph = std::conj(pivot) / mag;
  if (pivot0) return {Cx{mag, 0.0}, ph * v.c1};
  return {ph * v.c0, Cx{mag, 0.0}};
}

// ---------------------------------------------------------------- Op2

/// 2x2 complex matrix, rows and columns indexed by |0>, |1>.
struct Op2 {
  Cx m[2][2]{};

  static Op2 identity() {
    Op2 r;
    r.m[0][0] = r.m[1][1] = 1.0;
    return r;
  }
  static Op2 zero() { return {}; }
};

inline Op2 operator+(const Op2& a, const Op2& b) {
  Op2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] + b.m[i][j];
  return r;
}

inline Op2 operator-(const Op2& a, const Op2& b) {
  Op2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
  return r;
}

inline Op2 operator*(Cx s, const Op2& a) {
  Op2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = s * a.m[i][j];
  return r;
}

inline Op2 operator*(const Op2& a, const Op2& b) {
  Op2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
  return r;
}

inline Ket2 operator*(const Op2& a, const Ket2& v) {
  return {a.m[0][0] * v.c0 + a.m[0][1] * v.c1, a.m[1][0] * v.c0 + a.m[1][1] * v.c1};
}

inline Op2 adjoint(const Op2& a) {
  Op2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = std::conj(a.m[j][i]);
  return r;
}

/// |u><v|
inline Op2 outer(const Ket2& u, const Ket2& v) {
  Op2 r;
  r.m[0][0] = u.c0 * std::conj(v.c0);
  r.m[0][1] = u.c0 * std::conj(v.c1);
  r.m[1][0] = u.c1 * std::conj(v.c0);
  r.m[1][1] = u.c1 * std::conj(v.c1);
  return r;
}

inline Cx trace(const Op2& a) { return a.m[0][0] + a.m[1][1]; }

inline double max_abs(const Op2& a) {
  double r = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r = std::max(r, std::abs(a.m[i][j]));
  return r;
}

/// <u| A |v>
inline Cx expectation(const Ket2& u, const Op2& a, const Ket2& v) { return inner(u, a * v); }

// ---------------------------------------------------------------- Op4

/// 4-component complex vector over |00>,|01>,|10>,|11> (system (x) ancilla).
struct Ket4 {
  Cx c[4]{};
};

/// 4x4 complex matrix over the same tensor basis, index = 2*system + ancilla.
struct Op4 {
  Cx m[4][4]{};

  static Op4 identity() {
    Op4 r;
    for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
    return r;
  }
};

inline Op4 operator-(const Op4& a, const Op4& b) {
  Op4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.m[i][j] = a.m[i][j] - b.m[i][j];
  return r;
}

inline Op4 operator*(const Op4& a, const Op4& b) {
  Op4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Cx s = 0.0;
      for (int k = 0; k < 4; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

inline Ket4 operator*(const Op4& a, const Ket4& v) {
  Ket4 r;
  for (int i = 0; i < 4; ++i) {
    Cx s = 0.0;
    for (int k = 0; k < 4; ++k) s += a.m[i][k] * v.c[k];
    r.c[i] = s;
  }
  return r;
}

inline Op4 adjoint(const Op4& a) {
  Op4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.m[i][j] = std::conj(a.m[j][i]);
  return r;
}

inline double max_abs(const Op4& a) {
  double r = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r = std::max(r, std::abs(a.m[i][j]));
  return r;
}

inline Cx trace(const Op4& a) { return a.m[0][0] + a.m[1][1] + a.m[2][2] + a.m[3][3]; }

/// system (x) ancilla tensor product of vectors.
inline Ket4 kron(const Ket2& sys, const Ket2& anc) {
  Ket4 r;
  r.c[0] = sys.c0 * anc.c0;
  r.c[1] = sys.c0 * anc.c1;
  r.c[2] = sys.c1 * anc.c0;
  r.c[3] = sys.c1 * anc.c1;
  return r;
}

/// system (x) ancilla tensor product of operators.
inline Op4 kron(const Op2& sys, const Op2& anc) {
  Op4 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) r.m[2 * i + k][2 * j + l] = sys.m[i][j] * anc.m[k][l];
  return r;
}

/// |u><u| on the tensor space.
inline Op4 outer(const Ket4& u) {
  Op4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.m[i][j] = u.c[i] * std::conj(u.c[j]);
  return r;
}

/// Traces out the second (ancilla) factor: r[i][j] = sum_a W[2i+a][2j+a].
inline Op2 partial_trace_ancilla(const Op4& w) {
  Op2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r.m[i][j] = w.m[2 * i][2 * j] + w.m[2 * i + 1][2 * j + 1];
  return r;
}

// ------------------------------------------------------- unitarity checks

inline bool is_unitary(const Op2& u, double tol) {
  return max_abs(adjoint(u) * u - Op2::identity()) <= tol;
}

inline bool is_unitary(const Op4& u, double tol) {
  Op4 g = adjoint(u) * u;
  for (int i = 0; i < 4; ++i) g.m[i][i] -= 1.0;
  return max_abs(g) <= tol;
}

// ------------------------------------------------- Hermitian eigensystem

struct Eig2 {
  double lam_lo{};
  double lam_hi{};
  Ket2 v_lo{};
  Ket2 v_hi{};
};

/// Closed-form eigendecomposition of a 2x2 Hermitian matrix via the
/// trace/determinant formula. Eigenvectors are orthonormal and have the
/// canonical_phase convention. For a near-degenerate spectrum
/// (gap < 1e-13) the computational basis is returned.
/// Throws std::invalid_argument("not hermitian") if ||H - H^dag||_max > 1e-10.
inline Eig2 herm_eig2(const Op2& h) {
  double herm_dev = 2.0 * std::abs(h.m[0][0].imag());
  herm_dev = std::max(herm_dev, 2.0 * std::abs(h.m[1][1].imag()));
  herm_dev = std::max(herm_dev, std::abs(h.m[0][1] - std::conj(h.m[1][0])));
  if (herm_dev > 1e-10) throw std::invalid_argument("not hermitian");

  const double p = h.m[0][0].real();
  const double q = h.m[1][1].real();
  const Cx off = 0.5 * (h.m[0][1] + std::conj(h.m[1][0]));

  Eig2 r;
  const double gap = std::hypot(p - q, 2.0 * std::abs(off));
  r.lam_hi = 0.5 * ((p + q) + gap);
  r.lam_lo = 0.5 * ((p + q) - gap);

  if (gap < 1e-13) {
    r.v_hi = {1.0, 0.0};
    r.v_lo = {0.0, 1.0};
    return r;
  }

  // (H - lam_hi) v = 0 has two equivalent solutions; take the better
  // conditioned one (larger residual row).
  Ket2 v;
  if (std::abs(r.lam_hi - p) >= std::abs(r.lam_hi - q)) {
    v = {off, Cx{r.lam_hi - p, 0.0}};
  } else {
    v = {Cx{r.lam_hi - q, 0.0}, std::conj(off)};
  }
  r.v_hi = canonical_phase(normalized(v));
  // exact orthogonal complement
  r.v_lo = canonical_phase(Ket2{-std::conj(r.v_hi.c1), std::conj(r.v_hi.c0)});
  return r;
}

}  // namespace lossyq
