#pragma once

// Invariant battery: every identity the construction and the engine are
// supposed to satisfy, evaluated on a fixed deterministic grid plus seeded
// random inputs, each reported with its maximum deviation and tolerance.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "lossyq/config.hpp"
#include "lossyq/enumeration.hpp"
#include "lossyq/measurement.hpp"
#include "lossyq/povm.hpp"
#include "lossyq/random.hpp"
#include "lossyq/trajectory.hpp"

namespace lossyq {

struct CheckResult {
  std::string name;
  double max_dev{};
  double tol{};
  bool pass{};
};

namespace detail {

inline void add_check(std::vector<CheckResult>& out, const std::string& name, double dev,
                      double tol) {
  out.push_back({name, dev, tol, dev <= tol});
}

struct ParamGrid {
  std::vector<BasisParams> bases;
  std::vector<double> phis;
};

inline ParamGrid validation_grid(std::uint64_t seed, int n_random) {
  ParamGrid g;
  // fixed points: boundaries, the symmetric basis, and generic interior ones
  g.bases = {{1.0, 0.0},       {0.0, 0.0},        {1.0 / std::sqrt(2.0), 0.0},
             {0.8, 0.4},       {0.6, -2.0},       {0.3, 2.9},
             {0.99, 0.1},      {0.05, -0.7}};
  g.phis = {0.1, kPi / 6.0, 0.5, 0.9, 1.3};
  RandomStream rng(seed, 0);
  for (int i = 0; i < n_random; ++i) {
    g.bases.push_back({rng.next_unit(), wrap_angle((2.0 * rng.next_unit() - 1.0) * kPi)});
    g.phis.push_back(0.05 + 1.45 * rng.next_unit());
  }
  return g;
}

}  // namespace detail

/// Runs the full invariant suite. All checks are deterministic for a fixed
/// seed. `n_random` controls the number of random (a, chi) points and random
/// phi values added to the fixed grid.
inline std::vector<CheckResult> run_validation_suite(std::uint64_t seed = 42, int n_random = 1000) {
  std::vector<CheckResult> out;
  const detail::ParamGrid grid = detail::validation_grid(seed, n_random);

  // ---- linalg: eigendecomposition reconstruction + partial trace
  {
    RandomStream rng(seed, 1);
    double recon = 0.0, resid = 0.0, ortho = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Op2 h;
      const double d0 = 4.0 * rng.next_unit() - 2.0;
      const double d1 = 4.0 * rng.next_unit() - 2.0;
      const Cx off{2.0 * rng.next_unit() - 1.0, 2.0 * rng.next_unit() - 1.0};
      h.m[0][0] = d0;
      h.m[1][1] = d1;
      h.m[0][1] = off;
      h.m[1][0] = std::conj(off);
      const Eig2 e = herm_eig2(h);
      const Op2 back = Cx{e.lam_lo, 0.0} * outer(e.v_lo, e.v_lo) +
                       Cx{e.lam_hi, 0.0} * outer(e.v_hi, e.v_hi);
      recon = std::max(recon, max_abs(back - h));
      const Ket2 r_lo = h * e.v_lo - Cx{e.lam_lo, 0.0} * e.v_lo;
      const Ket2 r_hi = h * e.v_hi - Cx{e.lam_hi, 0.0} * e.v_hi;
      resid = std::max({resid, norm(r_lo), norm(r_hi)});
      ortho = std::max(ortho, std::abs(inner(e.v_lo, e.v_hi)));
    }
    detail::add_check(out, "herm_eig2 reconstruction", recon, 1e-10);
    detail::add_check(out, "herm_eig2 residual Hv-lv", resid, 1e-10);
    detail::add_check(out, "herm_eig2 orthogonality", ortho, 1e-12);

    RandomStream rng2(seed, 2);
    double tr_dev = 0.0;
    for (int i = 0; i < 200; ++i) {
      Op4 w;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          w.m[r][c] = Cx{2.0 * rng2.next_unit() - 1.0, 2.0 * rng2.next_unit() - 1.0};
      tr_dev = std::max(tr_dev, std::abs(trace(partial_trace_ancilla(w)) - trace(w)));
    }
    detail::add_check(out, "partial_trace preserves trace", tr_dev, 1e-12);
  }

  // ---- construction identities over the grid
  {
    double comp = 0.0, comm = 0.0, colsum = 0.0, polar = 0.0, unit = 0.0, branch = 0.0;
    double positivity_violation = 0.0;  // stays 0 while every <e_k|0> > 0
    const std::size_t n_pairs = std::max(grid.bases.size(), grid.phis.size());
    for (std::size_t i = 0; i < n_pairs; ++i) {
      const BasisParams p = grid.bases[i % grid.bases.size()];
      const double phi = grid.phis[i % grid.phis.size()];
      const StepOperators ops = build_step_operators(p, phi);
      const auto [b0, b1] = basis_vectors(p);

      comp = std::max(comp, max_abs(adjoint(ops.m0) * ops.m0 + adjoint(ops.m1) * ops.m1 -
                                    Op2::identity()));
      const Op2 proj = outer(b0, b0);
      for (const Op2* m : {&ops.m0, &ops.m1}) {
        const Op2 povm = adjoint(*m) * (*m);
        comm = std::max(comm, max_abs(povm * proj - proj * povm));
      }
      colsum = std::max({colsum, std::abs(ops.lam[0][0] + ops.lam[0][1] - 1.0),
                         std::abs(ops.lam[1][0] + ops.lam[1][1] - 1.0)});
      for (int k = 0; k < 2; ++k) {
        const Op2& m = (k == 0) ? ops.m0 : ops.m1;
        const Op2& u = (k == 0) ? ops.u0 : ops.u1;
        const Op2 sqrt_povm = Cx{std::sqrt(ops.lam[0][k]), 0.0} * outer(b0, b0) +
                              Cx{std::sqrt(ops.lam[1][k]), 0.0} * outer(b1, b1);
        polar = std::max(polar, max_abs(u * sqrt_povm - m));
        unit = std::max(unit, max_abs(adjoint(u) * u - Op2::identity()));
      }
      if (!is_computational(p)) {
        positivity_violation = std::max(
            {positivity_violation, -ops.anc.e0.c0.real(), -ops.anc.e1.c0.real(),
             (ops.anc.e0.c0.real() <= 0.0 || ops.anc.e1.c0.real() <= 0.0) ? 1.0 : 0.0});
      }
    }
    // branch continuity of the ancilla choice at a = b
    for (double phi : grid.phis) {
      const double eps_a = 1e-9;
      const double a_mid = 1.0 / std::sqrt(2.0);
      for (double chi : {0.0, 1.1}) {
        const AncillaBasis above = select_ancilla_basis({std::sqrt(0.5 + eps_a), chi}, phi);
        const AncillaBasis below = select_ancilla_basis({std::sqrt(0.5 - eps_a), chi}, phi);
        const AncillaBasis at = select_ancilla_basis({a_mid, chi}, phi);
        branch = std::max({branch, norm(above.e0 - at.e0), norm(below.e0 - at.e0),
                           norm(above.e1 - at.e1), norm(below.e1 - at.e1)});
      }
    }
    detail::add_check(out, "completeness M0+M1", comp, 1e-11);
    detail::add_check(out, "POVM commutes with basis projector", comm, 1e-10);
    detail::add_check(out, "lambda row sums", colsum, 1e-11);
    detail::add_check(out, "polar reconstruction", polar, 1e-10);
    detail::add_check(out, "unitarity of U_k", unit, 1e-10);
    detail::add_check(out, "ancilla overlap positivity", positivity_violation, 0.0);
    detail::add_check(out, "ancilla branch continuity at a=b", branch, 1e-7);
  }

  // ---- exact branch agreement at a = b (the two cases coincide)
  {
    double dev = 0.0;
    const double a_mid = 1.0 / std::sqrt(2.0);
    for (double phi : {0.2, 0.5, 1.0}) {
      for (double chi : {0.0, -0.9, 2.2}) {
        const AncillaBasis at = select_ancilla_basis({a_mid, chi}, phi);
        // delta = 0 there, so both branches reduce to the same vectors
        const double lo = std::sqrt(0.5);
        const Cx et = std::polar(1.0, chi + phi - kPi / 2.0);
        dev = std::max({dev, norm(at.e0 - Ket2{lo, lo * et}), norm(at.e1 - Ket2{lo, -lo * et}),
                        std::abs(at.delta)});
      }
    }
    detail::add_check(out, "branch coincidence at a=b", dev, 1e-12);
  }

  // ---- Eq-9-style closed form cross-check, valid at a = b only
  {
    double dev = 0.0;
    const double a_mid = 1.0 / std::sqrt(2.0);
    for (double phi : grid.phis) {
      const StepOperators ops = build_step_operators({a_mid, 0.3}, phi);
      const double hi = 0.5 * (1.0 + std::sin(phi));
      const double lo = 0.5 * (1.0 - std::sin(phi));
      dev = std::max({dev, std::abs(ops.lam[0][0] - hi), std::abs(ops.lam[1][1] - hi),
                      std::abs(ops.lam[0][1] - lo), std::abs(ops.lam[1][0] - lo)});
    }
    detail::add_check(out, "closed-form eigenvalues at a=b", dev, 1e-10);
  }

  // ---- boundary operator table at a = 1
  {
    double dev = 0.0;
    for (double phi : grid.phis) {
      const StepOperators ops = build_step_operators({1.0, 0.0}, phi);
      const double c2 = std::cos(phi) * std::cos(phi);
      dev = std::max({dev, std::abs(ops.lam[0][0] - 1.0), std::abs(ops.lam[0][1]),
                      std::abs(ops.lam[1][0] - c2), std::abs(ops.lam[1][1] - (1.0 - c2))});
    }
    detail::add_check(out, "boundary lambda table at a=1", dev, 1e-12);
  }

  // ---- dilation equivalence
  {
    double dev = 0.0;
    for (std::size_t i = 0; i < grid.bases.size(); ++i) {
      const double phi = grid.phis[i % grid.phis.size()];
      dev = std::max(dev, dilation_residual(select_ancilla_basis(grid.bases[i], phi), phi));
    }
    detail::add_check(out, "dilation vs Kraus residual", dev, 1e-11);
  }

  // ---- trajectory invariants
  {
    RandomStream seed_stream(seed, 3);
    double form = 0.0, eps_law = 0.0, prob_prod = 0.0, prob_closed = 0.0, lower_left = 0.0;
    double x_resum = 0.0, closed_state = 0.0, overlap_pos = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
      const double a = 0.1 + 0.8 * seed_stream.next_unit();
      const double chi = wrap_angle((2.0 * seed_stream.next_unit() - 1.0) * kPi);
      const double phi = 0.2 + 1.1 * seed_stream.next_unit();
      const double alpha_sq = seed_stream.next_unit();
      const BasisParams basis{a, chi};
      const auto [b0, b1] = basis_vectors(basis);
      const Ket2 state0 = Cx{std::sqrt(alpha_sq), 0.0} * b0 +
                          std::polar(std::sqrt(1.0 - alpha_sq), 1.3) * b1;
      RandomStream rng(seed, 100 + static_cast<std::uint64_t>(rep));
      TrajectoryOptions opt;
      opt.check_every = 1;  // cross-check every step in validation
      const Trajectory t = run_trajectory(state0, basis, phi, 30, 1e-9, rng, opt);

      Op2 form_matrix;
      form_matrix.m[0][0] = 1.0;
      form_matrix.m[0][1] = t.x;
      form_matrix.m[1][1] = t.eps;
      form = std::max(form, max_abs(t.product - Cx{t.prefactor, 0.0} * form_matrix));
      const int n = static_cast<int>(t.steps.size());
      const double cn = std::pow(std::cos(phi), n);
      eps_law = std::max(eps_law, std::abs(std::abs(t.eps) - cn) / cn);
      prob_prod = std::max(prob_prod,
                           std::abs(expectation(state0, adjoint(t.product) * t.product, state0)
                                        .real() -
                                    t.total_prob));
      double l0 = 1.0, l1 = 1.0, pp = 1.0;
      for (const StepRecord& s : t.steps) {
        l0 *= s.lam_b0;
        l1 *= s.lam_b1;
        pp *= s.prob;
        overlap_pos = std::max(overlap_pos, s.anc_overlap0 > 0.0 ? 0.0 : 1.0);
      }
      const double a2 = std::norm(inner(b0, state0));
      prob_closed = std::max({prob_closed, std::abs(a2 * l0 + (1.0 - a2) * l1 - t.total_prob),
                              std::abs(pp - t.total_prob)});
      lower_left = std::max(lower_left, std::abs(t.product.m[1][0]));
      closed_state = std::max(closed_state, t.max_closed_form_dev);

      // recompute x from the stored per-step ancilla data (full Eq-21 sum)
      Cx x_full{};
      Cx eps_run{1.0, 0.0};
      BasisParams cur = basis;
      const Cx phase = std::polar(1.0, phi);
      for (const StepRecord& s : t.steps) {
        const AncillaBasis anc = select_ancilla_basis(cur, phi);
        const Ket2& e = (s.outcome == 0) ? anc.e0 : anc.e1;
        const Cx g0 = std::conj(e.c0), g1 = std::conj(e.c1);
        x_full += Cx{0.0, -std::sin(phi)} * (g1 / g0) * phase * eps_run;
        eps_run *= std::cos(phi) * phase;
        cur = s.basis_after;
      }
      x_resum = std::max(x_resum, std::abs(x_full - t.x));
    }
    detail::add_check(out, "product matches [[1,x],[0,eps]]*prefactor", form, 1e-9);
    detail::add_check(out, "|eps| = cos^N(phi) (relative)", eps_law, 1e-10);
    detail::add_check(out, "total_prob vs product quadratic form", prob_prod, 1e-10);
    detail::add_check(out, "total_prob vs eigenvalue products", prob_closed, 1e-9);
    detail::add_check(out, "cumulative product lower-left zero", lower_left, 1e-12);
    detail::add_check(out, "closed-form state equivalence", closed_state, 1e-9);
    detail::add_check(out, "x accumulator vs full resummation", x_resum, 1e-9);
    detail::add_check(out, "ancilla overlap positive along trajectories", overlap_pos, 0.0);
  }

  // ---- overlap formula vs direct eigendecomposition
  {
    RandomStream rng(seed, 4);
    double dev = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const Cx x = std::polar(std::pow(10.0, -3.0 + 5.0 * rng.next_unit()),
                              2.0 * kPi * rng.next_unit());
      const Cx eps = std::polar(0.999 * rng.next_unit(), 2.0 * kPi * rng.next_unit());
      Op2 h;
      h.m[0][0] = 1.0 + std::norm(x);
      h.m[0][1] = x * std::conj(eps);
      h.m[1][0] = std::conj(x) * eps;
      h.m[1][1] = std::norm(eps);
      const Eig2 e = herm_eig2(h);
      dev = std::max(dev, std::abs(overlap_from_diagnostics(x, eps) - std::norm(e.v_hi.c0)));
    }
    detail::add_check(out, "overlap formula vs herm_eig2", dev, 1e-9);
  }

  // ---- enumeration identities
  {
    RandomStream rng(seed, 5);
    double sumdev = 0.0, recdev = 0.0, conserve = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
      const double a = 0.15 + 0.7 * rng.next_unit();
      const double chi = wrap_angle((2.0 * rng.next_unit() - 1.0) * kPi);
      const double phi = 0.25 + 0.9 * rng.next_unit();
      const BasisParams basis{a, chi};
      const auto [s0, s1] = sum_identities(basis, phi, 10);
      sumdev = std::max({sumdev, s0, s1});
      const auto [b0, b1] = basis_vectors(basis);
      const Ket2 state0 = Cx{std::sqrt(0.4), 0.0} * b0 + std::polar(std::sqrt(0.6), 0.7) * b1;
      recdev = std::max(recdev, recursion_check(state0, basis, phi, 8));
      const EnumerationResult r = enumerate_exact(state0, basis, phi, 8);
      conserve = std::max(conserve, std::abs(r.p_b0 + r.p_b1 + r.p_undecided - 1.0));
    }
    detail::add_check(out, "lambda-product sum identities", sumdev, 1e-9);
    detail::add_check(out, "outcome-probability recursion", recdev, 1e-10);
    detail::add_check(out, "leaf probability conservation", conserve, 1e-10);
  }

  // ---- POVM law of total probability (algebraic identity)
  {
    RandomStream rng(seed, 6);
    double dev = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      CommutingPOVM p;
      p.basis = {0.1 + 0.8 * rng.next_unit(), wrap_angle(2.0 * rng.next_unit() - 1.0)};
      const double a1 = rng.next_unit(), a2 = (1.0 - a1) * rng.next_unit();
      const double b1w = rng.next_unit(), b2w = (1.0 - b1w) * rng.next_unit();
      p.weights = {{a1, b1w}, {a2, b2w}, {1.0 - a1 - a2, 1.0 - b1w - b2w}};
      validate_povm(p);
      const auto [b0, b1] = basis_vectors(p.basis);
      const double alpha_sq = rng.next_unit();
      const Ket2 state = Cx{std::sqrt(alpha_sq), 0.0} * b0 +
                         std::polar(std::sqrt(1.0 - alpha_sq), -0.4) * b1;
      const std::vector<double> probs = exact_povm_probs(state, p);
      double total = 0.0;
      for (std::size_t j = 0; j < probs.size(); ++j) {
        total += probs[j];
        const double via_columns = p.weights[j][0] * alpha_sq + p.weights[j][1] * (1.0 - alpha_sq);
        dev = std::max(dev, std::abs(probs[j] - via_columns));
      }
      dev = std::max(dev, std::abs(total - 1.0));
    }
    detail::add_check(out, "POVM law of total probability", dev, 1e-12);
  }

  return out;
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
  for (const CheckResult& c : checks)
    if (!c.pass) return false;
  return true;
}

inline std::string format_report(const std::vector<CheckResult>& checks) {
  std::ostringstream out;
  for (const CheckResult& c : checks) {
    out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": max deviation " << fmt17(c.max_dev)
        << " (tolerance " << fmt17(c.tol) << ")\n";
  }
  return out.str();
}

}  // namespace lossyq
