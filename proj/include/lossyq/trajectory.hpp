#pragma once

// Feedback-controlled trajectory engine. Each step measures the ancilla in
// the basis selected for the current (evolved) measurement basis, samples the
// outcome by the Born rule, and updates both the system state and the basis.
// Alongside the direct state, the engine maintains the cumulative
// measurement-operator product in the triangular form
//
//   product = [[1, x], [0, eps]] * prefactor,
//
// with |eps| = cos^N(phi) deterministic and prefactor the (real, positive)
// running product of <e_k|0>. The stored product carries the global phase
// e^{i N phi}, which aligns its top-left entry with the real prefactor; the
// raw operator product differs from it by that phase only.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossyq/linalg.hpp"
#include "lossyq/measurement.hpp"
#include "lossyq/random.hpp"

namespace lossyq {

enum class Conclusion { kB0, kB1, kUndecided };

inline const char* to_string(Conclusion c) {
  switch (c) {
    case Conclusion::kB0: return "B0";
    case Conclusion::kB1: return "B1";
    default: return "UNDECIDED";
  }
}

/// 1 - max overlap of the basis with {|0>,|1>}.
inline double basis_distance(const BasisParams& p) {
  const double o = p.a * p.a;
  return 1.0 - std::max(o, 1.0 - o);
}

/// Shared conclusion rule: B0 if |<b0|0>|^2 > 1/2, B1 if below, UNDECIDED
/// within the 1e-9 tie window. Used by both the sampler and the enumeration
/// oracle so classifications cannot drift apart.
inline Conclusion conclude_basis(const BasisParams& p) {
  const double o = p.a * p.a;
  if (std::abs(o - 0.5) <= 1e-9) return Conclusion::kUndecided;
  return o > 0.5 ? Conclusion::kB0 : Conclusion::kB1;
}

// ------------------------------------------------------------------ step

struct StepRecord {
  int index{};               // 1-based position in the trajectory
  int outcome{};             // k_i
  double prob{};             // conditional probability of the realized outcome
  double lam_b0{};           // eigenvalue of M_k^dag M_k on the pre-step |b0>
  double lam_b1{};
  BasisParams basis_after{};
  Ket2 state_after{};
  double anc_overlap0{};     // <e_k|0>, real and >= 0 by convention
  double abs_eps{};          // |eps| after this step, = cos^index(phi)
};

namespace detail {

struct StepExtras {
  StepRecord rec{};
  Cx g0{}, g1{};     // <e_k|0>, <e_k|1> of the realized outcome
  Op2 kraus{};
  Op2 back_unitary{};
};

inline StepExtras apply_step(const Ket2& state, const BasisParams& basis,
                             const StepOperators& ops, int index, double u) {
  StepExtras out;
  const Ket2 m0psi = ops.m0 * state;
  const double p0 = norm_sq(m0psi);
  const int k = (u < p0) ? 0 : 1;

  const Op2& m = (k == 0) ? ops.m0 : ops.m1;
  const Op2& uk = (k == 0) ? ops.u0 : ops.u1;
  const Ket2& e = (k == 0) ? ops.anc.e0 : ops.anc.e1;

  const Ket2 mpsi = (k == 0) ? m0psi : ops.m1 * state;
  const double pk = norm_sq(mpsi);
  if (pk < 1e-15) throw std::runtime_error("measure-zero branch");

  out.rec.index = index;
  out.rec.outcome = k;
  out.rec.prob = pk;
  out.rec.lam_b0 = ops.lam[0][k];
  out.rec.lam_b1 = ops.lam[1][k];
  out.rec.state_after = (Cx{1.0 / std::sqrt(pk), 0.0}) * mpsi;
  out.rec.basis_after = canonicalize_basis(uk * basis_vectors(basis).first);
  out.rec.anc_overlap0 = e.c0.real();
  out.g0 = std::conj(e.c0);
  out.g1 = std::conj(e.c1);
  out.kraus = m;
  out.back_unitary = uk;
  return out;
}

}  // namespace detail

/// One weak-measurement step: builds the step operators for (basis, phi),
/// picks outcome 0 iff u < <psi|M0^dag M0|psi>, and returns the realized
/// branch with the updated state and (canonicalized) evolved basis.
inline StepRecord step(const Ket2& state, const BasisParams& basis, double phi, double u) {
  if (!is_normalized(state)) throw std::invalid_argument("step: state not normalized");
  return detail::apply_step(state, basis, build_step_operators(basis, phi), 1, u).rec;
}

// ------------------------------------------------------------ trajectory

struct Trajectory {
  std::vector<StepRecord> steps;
  Op2 product{Op2::identity()};  // cumulative product, phase-aligned as above
  Cx x{};
  Cx eps{1.0, 0.0};
  double prefactor{1.0};
  BasisParams final_basis{};
  Conclusion conclusion{Conclusion::kUndecided};
  double total_prob{1.0};
  double max_closed_form_dev{0.0};  // worst deviation seen by the cross-check
};

struct TrajectoryOptions {
  /// Cadence of the closed-form state cross-check (amplitudes proportional to
  /// alpha * prod sqrt(lam_b0) and beta * prod sqrt(lam_b1) on the evolved
  /// basis). 1 checks every step; 0 disables.
  int check_every = 8;
};

namespace detail {

// Shared trajectory loop. `boundary` enables the computational-basis
// protocol: terminate as soon as the basis flips orientation.
inline Trajectory run_loop(const Ket2& state0, const BasisParams& basis0, double phi, int n_max,
                           double eta, bool boundary, RandomStream& rng,
                           const TrajectoryOptions& opt) {
  Trajectory t;
  const auto [b0, b1] = basis_vectors(basis0);
  const Cx alpha = inner(b0, state0);
  const Cx beta = inner(b1, state0);

  Ket2 state = state0;
  BasisParams basis = basis0;
  Ket2 b0_ev = b0, b1_ev = b1;  // exact evolved basis vectors (U products)
  double lam0_prod = 1.0, lam1_prod = 1.0;
  const Cx phase_step = std::polar(1.0, phi);
  const double c = std::cos(phi);
  const double s = std::sin(phi);

  StepOperators ops = build_step_operators(basis, phi);
  t.steps.reserve(static_cast<std::size_t>(std::min(n_max, 256)));

  for (int i = 1; i <= n_max; ++i) {
    const double before_a = basis.a;
    auto st = apply_step(state, basis, ops, i, rng.next_unit());

    t.product = (phase_step * st.kraus) * t.product;
    if (st.g0 != Cx{0.0, 0.0}) {
      // one new term of the x sum per step: -i (g1/g0) sin(phi) e^{i phi} eps
      t.x += Cx{0.0, -s} * (st.g1 / st.g0) * phase_step * t.eps;
    }
    t.eps *= c * phase_step;
    t.prefactor *= st.g0.real();
    t.total_prob *= st.rec.prob;
    lam0_prod *= st.rec.lam_b0;
    lam1_prod *= st.rec.lam_b1;
    b0_ev = st.back_unitary * b0_ev;
    b1_ev = st.back_unitary * b1_ev;

    state = st.rec.state_after;
    basis = st.rec.basis_after;
    st.rec.abs_eps = std::abs(t.eps);
    t.steps.push_back(st.rec);

    if (opt.check_every > 0 && (i % opt.check_every == 0 || i == n_max)) {
      const Cx scale{1.0 / std::sqrt(t.total_prob), 0.0};
      const Ket2 closed = scale * (alpha * std::sqrt(lam0_prod) * b0_ev +
                                   beta * std::sqrt(lam1_prod) * b1_ev);
      const Ket2 diff = state - closed;
      const double dev = std::max(std::abs(diff.c0), std::abs(diff.c1));
      t.max_closed_form_dev = std::max(t.max_closed_form_dev, dev);
      if (dev > 1e-9) throw std::logic_error("trajectory state disagrees with its closed form");
    }

    if (boundary) {
      if (std::abs(basis.a - before_a) > 0.5) break;  // basis flipped: decided
    } else {
      if (basis_distance(basis) < eta) break;
      if (i < n_max) ops = build_step_operators(basis, phi);
    }
  }

  t.final_basis = basis;
  t.conclusion = conclude_basis(basis);
  return t;
}

}  // namespace detail

/// Runs the feedback protocol from an arbitrary target basis. Stops at n_max
/// steps or as soon as the evolved basis is within eta of the computational
/// basis. A computational starting basis is delegated to the boundary
/// protocol (its basis starts converged, so the stopping rule above would
/// fire before any information is gathered; the flip rule is the correct
/// specialization).
inline Trajectory run_trajectory(const Ket2& state0, const BasisParams& basis0, double phi,
                                 int n_max, double eta, RandomStream& rng,
                                 const TrajectoryOptions& opt = {}) {
  if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("eta must lie in (0, 1/2)");
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!is_normalized(state0)) throw std::invalid_argument("run_trajectory: state not normalized");
  const bool boundary = is_computational(basis0);
  return detail::run_loop(state0, basis0, phi, n_max, eta, boundary, rng, opt);
}

/// Computational-basis protocol: measure {|0>,|1>} directly. Terminates on
/// the first basis-flipping outcome (conclusion B1) or after n_max
/// consecutive surviving outcomes (conclusion B0).
inline Trajectory run_boundary_trajectory(const Ket2& state0, double phi, int n_max,
                                          RandomStream& rng, const TrajectoryOptions& opt = {}) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (!is_normalized(state0)) throw std::invalid_argument("run_boundary_trajectory: state not normalized");
  return detail::run_loop(state0, BasisParams{1.0, 0.0}, phi, n_max, /*eta=*/0.0,
                          /*boundary=*/true, rng, opt);
}

// ----------------------------------------------------------- diagnostics

/// Squared overlap |<v_+|0>|^2 of the dominant eigenvector of
/// [[1+|x|^2, x eps*], [x* eps, |eps|^2]] with |0>, in closed form.
inline double overlap_from_diagnostics(Cx x, Cx eps) {
  const double x2 = std::norm(x);
  const double e2 = std::norm(eps);
  if (x2 == 0.0 || e2 == 0.0) return 1.0;
  const double s = 1.0 + x2 + e2;
  const double root = std::sqrt(std::max(0.0, s * s - 4.0 * e2));
  const double t = 1.0 + x2 - e2 + root;
  return (t * t) / (t * t + 4.0 * x2 * e2);
}

/// Per-step basis distance d_N = 1 - max overlap of the evolved basis with
/// {|0>,|1>}, read from the stored records.
inline std::vector<std::pair<int, double>> basis_convergence_report(const Trajectory& t) {
  std::vector<std::pair<int, double>> rows;
  rows.reserve(t.steps.size());
  for (const StepRecord& s : t.steps) rows.emplace_back(s.index, basis_distance(s.basis_after));
  return rows;
}

}  // namespace lossyq
