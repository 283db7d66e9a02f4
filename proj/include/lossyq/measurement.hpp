#pragma once

// Per-step measurement construction for the destructive weak-measurement
// protocol. Given a target measurement basis {|b0>,|b1>} and an interaction
// strength phi, this builds the ancilla projector pair whose weak-swap
// dilation measures the system in that basis, the effective Kraus operators,
// the POVM eigenvalues in the target basis, and the back-action unitaries of
// the polar decomposition.

#include <stdexcept>
#include <utility>

#include "lossyq/linalg.hpp"

namespace lossyq {

// ---------------------------------------------------------------- basis

/// Canonical parameterization of a measurement basis
///   |b0> = a|0> + b e^{i chi}|1>,   |b1> = b|0> - a e^{i chi}|1>,
/// with a in [0,1], b = sqrt(1-a^2) derived, chi in [-pi,pi).
/// When a is 0 or 1 the phase is physically meaningless and fixed to 0.
struct BasisParams {
  double a{1.0};
  double chi{0.0};
};

/// Wraps an angle to [-pi, pi).
inline double wrap_angle(double x) {
  double y = std::fmod(x + kPi, 2.0 * kPi);
  if (y < 0.0) y += 2.0 * kPi;
  return y - kPi;
}

/// True when the basis is the computational one (either orientation).
inline bool is_computational(const BasisParams& p) {
  return p.a >= 1.0 - 1e-14 || p.a <= 1e-14;
}

inline std::pair<Ket2, Ket2> basis_vectors(const BasisParams& p) {
  const double b = std::sqrt(std::max(0.0, 1.0 - p.a * p.a));
  const Cx phase = std::polar(1.0, p.chi);
  Ket2 b0{p.a, b * phase};
  Ket2 b1{b, -p.a * phase};
  return {b0, b1};
}

/// Inverts the parameterization: a = |<0|b0>|, chi = arg<1|b0> - arg<0|b0>.
/// The result reproduces b0 up to a global phase.
inline BasisParams canonicalize_basis(const Ket2& b0) {
  if (!is_normalized(b0)) throw std::invalid_argument("canonicalize_basis: input not normalized");
  const double a = std::abs(b0.c0);
  if (a < 1e-14) return {0.0, 0.0};
  if (a > 1.0 - 1e-14) return {std::min(a, 1.0), 0.0};
  return {a, wrap_angle(std::arg(b0.c1) - std::arg(b0.c0))};
}

// ------------------------------------------------------------- ancilla

/// The feedback-chosen ancilla projector pair |e0><e0|, |e1><e1| together
/// with the derived quantities
///   delta = sqrt((1 - 4a^2b^2) / (1 - 4a^2b^2 cos^2 phi)),
///   theta = chi + phi - pi/2.
/// Both vectors carry the convention <e_k|0> real >= 0; when that component
/// vanishes (computational basis) the |1>-component is made real >= 0.
struct AncillaBasis {
  Ket2 e0{};
  Ket2 e1{};
  double delta{};
  double theta{};
};

inline AncillaBasis select_ancilla_basis(const BasisParams& p, double phi) {
  if (!(phi > 0.0 && phi < kPi / 2.0))
    throw std::invalid_argument("phi must lie in the open interval (0, pi/2)");

  const double a2 = p.a * p.a;
  const double b2 = std::max(0.0, 1.0 - a2);
  const double q = 4.0 * a2 * b2;
  const double c = std::cos(phi);
  double delta = std::sqrt(std::max(0.0, 1.0 - q) / (1.0 - q * c * c));
  if (delta > 1.0) delta = 1.0;
  const double theta = p.chi + phi - kPi / 2.0;

  const double hi = std::sqrt((1.0 + delta) / 2.0);
  const double lo = std::sqrt((1.0 - delta) / 2.0);
  const Cx et = std::polar(1.0, theta);

  Ket2 e0, e1;
  if (a2 >= b2) {
    e0 = {hi, lo * et};
    e1 = {lo, -hi * et};
  } else {
    e0 = {lo, hi * et};
    e1 = {hi, -lo * et};
  }
  return {canonical_phase(e0), canonical_phase(e1), delta, theta};
}

// --------------------------------------------------------------- Kraus

/// Effective measurement operator of one weak-swap step followed by the
/// ancilla projection onto |e>:
///   M = <e|0> cos(phi) I - i sin(phi) |0><e|.
/// In the computational basis the lower-left entry is exactly zero.
inline Op2 kraus_from_ancilla(const Ket2& e, double phi) {
  if (!is_normalized(e)) throw std::invalid_argument("kraus_from_ancilla: ancilla vector not normalized");
  const Cx g0 = std::conj(e.c0);
  const Cx g1 = std::conj(e.c1);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  Op2 m;
  m.m[0][0] = g0 * Cx{c, -s};  // <e|0> e^{-i phi}
  m.m[0][1] = Cx{0.0, -s} * g1;
  m.m[1][0] = 0.0;
  m.m[1][1] = g0 * c;
  return m;
}

// ------------------------------------------------------ POVM eigenvalues

/// Diagonalizes M^dag M and pairs each eigenvalue with |b0> or |b1> by the
/// larger squared overlap. The winning overlap must exceed 1 - 1e-8;
/// anything less signals an ancilla basis that does not belong to this
/// measurement basis. Returns (lambda on b0, lambda on b1), clamped to [0,1].
///
/// The smaller eigenvalue is refined as |det M|^2 / lam_hi: the closed-form
/// (tr - gap)/2 loses all relative accuracy once the spectrum spans many
/// orders of magnitude (a deeply converged basis), while det M of the
/// triangular Kraus matrix is a pure product with no cancellation.
inline std::pair<double, double> povm_eigenvalues(const Op2& m, const BasisParams& p) {
  const Eig2 eig = herm_eig2(adjoint(m) * m);
  const auto [b0, b1] = basis_vectors(p);
  const double o_hi = std::norm(inner(eig.v_hi, b0));
  const double o_lo = std::norm(inner(eig.v_lo, b0));
  const auto clamp01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };

  double lam_hi = clamp01(eig.lam_hi);
  double lam_lo = clamp01(eig.lam_lo);
  const double det = std::norm(m.m[0][0] * m.m[1][1] - m.m[0][1] * m.m[1][0]);
  if (lam_hi > 0.0) lam_lo = clamp01(det / lam_hi);

  if (o_hi >= o_lo) {
    if (o_hi < 1.0 - 1e-8) throw std::runtime_error("basis mismatch");
    return {lam_hi, lam_lo};
  }
  if (o_lo < 1.0 - 1e-8) throw std::runtime_error("basis mismatch");
  return {lam_lo, lam_hi};
}

// ------------------------------------------------------- polar unitary

/// Back-action unitary of the polar decomposition M = U sqrt(M^dag M).
///
/// Algebraically U = M (lam_b0^{-1/2}|b0><b0| + lam_b1^{-1/2}|b1><b1|); it is
/// built here as U = u0<b0| + u1<b1| with u_k the normalized columns M|b_k>,
/// re-orthogonalizing the weaker column against the stronger. The two forms
/// coincide (||M|b_k>|| = sqrt(lam)), but the column form stays accurate when
/// one eigenvalue underflows on a deeply converged basis, where 1/sqrt(lam)
/// would amplify roundoff past the unitarity tolerance.
///
/// A column of exactly zero norm only happens at the computational basis,
/// where the polar factor is no longer unique and the protocol fixes
/// U = -i sigma_x (the basis flip); elsewhere it is impossible and throws.
inline Op2 polar_unitary(const Op2& m, const BasisParams& p, double lam_b0, double lam_b1) {
  const auto [b0, b1] = basis_vectors(p);
  const Ket2 col0 = m * b0;
  const Ket2 col1 = m * b1;
  const double n0 = norm(col0);
  const double n1 = norm(col1);

  if (n0 == 0.0 || n1 == 0.0) {
    if (!is_computational(p))
      throw std::runtime_error(
          "polar unitary: vanishing POVM eigenvalue away from the computational basis");
    Op2 u;
    u.m[0][1] = u.m[1][0] = Cx{0.0, -1.0};  // -i sigma_x
    return u;
  }

  Ket2 u0 = (Cx{1.0 / n0, 0.0}) * col0;
  Ket2 u1 = (Cx{1.0 / n1, 0.0}) * col1;
  // A valid M has orthogonal columns here (the basis diagonalizes M^dag M);
  // near-parallel columns mean the basis does not belong to M.
  Ket2& weak = (lam_b0 >= lam_b1) ? u1 : u0;
  const Ket2& strong = (lam_b0 >= lam_b1) ? u0 : u1;
  weak = weak - inner(strong, weak) * strong;
  const double residual = norm(weak);
  if (residual < 1e-6) throw std::runtime_error("polar unitary: basis mismatch");
  weak = (Cx{1.0 / residual, 0.0}) * weak;
  return outer(u0, b0) + outer(u1, b1);
}

// ------------------------------------------------------- step assembly

/// All operators of one weak-measurement step.
/// lam[j][k] is the eigenvalue of M_k^dag M_k on |b_j>; each column pairs
/// with one outcome, each row sums to 1 (completeness in the shared
/// eigenbasis).
struct StepOperators {
  AncillaBasis anc{};
  Op2 m0{}, m1{};
  Op2 u0{}, u1{};
  double lam[2][2]{};
};

inline StepOperators build_step_operators(const BasisParams& p, double phi) {
  StepOperators ops;
  ops.anc = select_ancilla_basis(p, phi);
  ops.m0 = kraus_from_ancilla(ops.anc.e0, phi);
  ops.m1 = kraus_from_ancilla(ops.anc.e1, phi);
  const auto [l00, l10] = povm_eigenvalues(ops.m0, p);
  const auto [l01, l11] = povm_eigenvalues(ops.m1, p);
  ops.lam[0][0] = l00;
  ops.lam[1][0] = l10;
  ops.lam[0][1] = l01;
  ops.lam[1][1] = l11;
  ops.u0 = polar_unitary(ops.m0, p, l00, l10);
  ops.u1 = polar_unitary(ops.m1, p, l01, l11);
  return ops;
}

// ------------------------------------------------------------ dilation

/// The two-qubit weak swap U = cos(phi) I - i sin(phi) S, with S the swap
/// permutation. Unitary for any phi.
inline Op4 weak_swap(double phi) {
  const double c = std::cos(phi);
  const Cx is{0.0, std::sin(phi)};
  Op4 u;
  // S maps |s,a> -> |a,s>: 1 at (2a+s, 2s+a)
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) u.m[2 * a + s][2 * s + a] = -is;
  for (int i = 0; i < 4; ++i) u.m[i][i] += c;
  return u;
}

/// Consistency oracle for the Kraus form: compares, over a grid of input
/// states, the unnormalized post-measurement operator computed through the
/// full dilation (weak swap, ancilla projection, partial trace) against
/// M_k rho M_k^dag, and returns the maximum entrywise deviation.
inline double dilation_residual(const AncillaBasis& anc, double phi) {
  const Op4 u = weak_swap(phi);
  const Ket2 anc0{1.0, 0.0};

  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Ket2& e = (k == 0) ? anc.e0 : anc.e1;
    const Op2 kraus = kraus_from_ancilla(e, phi);
    const Op4 proj = kron(Op2::identity(), outer(e, e));
    // 24 pure states spread over the Bloch sphere
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double th = 0.27 + i * 0.52;
        const double ph = -2.6 + j * 1.57;
        const Ket2 psi{std::cos(th / 2.0), std::polar(std::sin(th / 2.0), ph)};

        const Op4 rho4 = outer(u * kron(psi, anc0));
        const Op2 via_dilation = partial_trace_ancilla(proj * rho4 * proj);
        const Op2 direct = kraus * outer(psi, psi) * adjoint(kraus);
        worst = std::max(worst, max_abs(via_dilation - direct));
      }
    }
  }
  return worst;
}

}  // namespace lossyq
