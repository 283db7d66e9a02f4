#pragma once

// Exhaustive enumeration over all outcome strings of the feedback protocol.
// Walks the binary tree depth-first, carrying the evolved basis, the two
// running eigenvalue products, and the cumulative operator product. String
// probabilities come from the closed form
//
//   p = |alpha|^2 prod lam_b0  +  |beta|^2 prod lam_b1,
//
// and each leaf is classified with the same conclusion rule the sampler
// uses. For a computational starting basis the tree collapses: a flipping
// outcome decides its whole subtree, so such leaves terminate early (their
// eigenvalue products already equal the subtree totals) and depths beyond
// the 2^n guard become feasible.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lossyq/measurement.hpp"
#include "lossyq/trajectory.hpp"

namespace lossyq {

inline constexpr int kMaxEnumerationDepth = 22;

struct EnumerationResult {
  int n{};
  double p_b0{};
  double p_b1{};
  double p_undecided{};
  double sum_lambda0{};  // sum over strings of prod lam_b0
  double sum_lambda1{};
  double max_leaf_d{};   // largest basis distance among the leaves

  struct StringStat {
    std::uint32_t bits{};  // outcomes, k_1 in the lowest bit
    int len{};
    double prob{};
    double final_d{};
  };
  std::vector<StringStat> per_string;  // filled only when requested
};

/// Node handed to enumerate_walk visitors. `product` is the cumulative
/// operator product in the same phase-aligned convention as Trajectory.
struct EnumerationNode {
  std::uint32_t bits{};
  int depth{};
  bool leaf{};
  bool terminated{};  // leaf created by the computational-basis flip rule
  BasisParams basis{};
  double lam0_prod{};
  double lam1_prod{};
  const Op2& product;
};

namespace detail {

template <class Visitor>
void enumerate_rec(const BasisParams& basis, double phi, int depth, int n, std::uint32_t bits,
                   double lam0, double lam1, const Op2& product, bool early_terminate,
                   bool flipped, Visitor&& visit) {
  const bool leaf = (depth == n) || (early_terminate && flipped);
  visit(EnumerationNode{bits, depth, leaf, early_terminate && flipped, basis, lam0, lam1, product});
  if (leaf) return;

  const StepOperators ops = build_step_operators(basis, phi);
  const Ket2 b0 = basis_vectors(basis).first;
  const Cx phase_step = std::polar(1.0, phi);
  const double before_a = basis.a;
  for (std::uint32_t k = 0; k < 2; ++k) {
    const Op2& uk = (k == 0) ? ops.u0 : ops.u1;
    const BasisParams next = canonicalize_basis(uk * b0);
    const Op2 next_product = (phase_step * ((k == 0) ? ops.m0 : ops.m1)) * product;
    const bool flip = std::abs(next.a - before_a) > 0.5;
    enumerate_rec(next, phi, depth + 1, n, bits | (k << depth), lam0 * ops.lam[0][k],
                  lam1 * ops.lam[1][k], next_product, early_terminate, flip,
                  visit);
  }
}

}  // namespace detail

/// Depth-first walk of the outcome tree, invoking the visitor at every node
/// (including the root and every leaf). Set early_terminate to apply the
/// computational-basis flip rule.
template <class Visitor>
void enumerate_walk(const BasisParams& basis0, double phi, int n, bool early_terminate,
                    Visitor&& visit) {
  if (n < 0) throw std::invalid_argument("enumeration depth must be >= 0");
  const Op2 id = Op2::identity();
  detail::enumerate_rec(basis0, phi, 0, n, 0u, 1.0, 1.0, id, early_terminate, false, visit);
}

/// Exact outcome statistics at depth n. The 2^n guard caps n at 22 except
/// for a computational starting basis, whose early-terminated tree is linear
/// in n.
inline EnumerationResult enumerate_exact(const Ket2& state0, const BasisParams& basis0, double phi,
                                         int n, bool with_per_string = false) {
  if (!is_normalized(state0)) throw std::invalid_argument("enumerate_exact: state not normalized");
  const bool boundary = is_computational(basis0);
  if (n < 1) throw std::invalid_argument("enumeration depth must be >= 1");
  if (n > kMaxEnumerationDepth && !boundary)
    throw std::invalid_argument("enumeration depth exceeds the 2^n resource guard (22)");

  const auto [b0, b1] = basis_vectors(basis0);
  const double alpha_sq = std::norm(inner(b0, state0));
  const double beta_sq = std::norm(inner(b1, state0));

  EnumerationResult r;
  r.n = n;
  enumerate_walk(basis0, phi, n, boundary, [&](const EnumerationNode& node) {
    if (!node.leaf) return;
    const double p = alpha_sq * node.lam0_prod + beta_sq * node.lam1_prod;
    switch (conclude_basis(node.basis)) {
      case Conclusion::kB0: r.p_b0 += p; break;
      case Conclusion::kB1: r.p_b1 += p; break;
      default: r.p_undecided += p; break;
    }
    r.sum_lambda0 += node.lam0_prod;
    r.sum_lambda1 += node.lam1_prod;
    const double d = basis_distance(node.basis);
    r.max_leaf_d = std::max(r.max_leaf_d, d);
    if (with_per_string)
      r.per_string.push_back({node.bits, node.depth, p, d});
  });
  return r;
}

/// Law-of-total-probability check: P(conclude B0) computed at depth n from
/// the root must equal p_0 P(depth n-1 | outcome 0) + p_1 P(depth n-1 |
/// outcome 1). Returns the absolute difference.
inline double recursion_check(const Ket2& state0, const BasisParams& basis0, double phi, int n) {
  if (n < 2) throw std::invalid_argument("recursion_check needs depth >= 2");
  const double full = enumerate_exact(state0, basis0, phi, n).p_b0;

  const StepOperators ops = build_step_operators(basis0, phi);
  const Ket2 b0 = basis_vectors(basis0).first;
  double unrolled = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Op2& m = (k == 0) ? ops.m0 : ops.m1;
    const Op2& uk = (k == 0) ? ops.u0 : ops.u1;
    const Ket2 mpsi = m * state0;
    const double pk = norm_sq(mpsi);
    if (pk < 1e-15) continue;  // measure-zero branch contributes nothing
    const Ket2 child_state = (Cx{1.0 / std::sqrt(pk), 0.0}) * mpsi;
    const BasisParams child_basis = canonicalize_basis(uk * b0);
    unrolled += pk * enumerate_exact(child_state, child_basis, phi, n - 1).p_b0;
  }
  return std::abs(full - unrolled);
}

/// Deviations of the two eigenvalue-product sums from 1 over the full
/// (never terminated) tree at depth n.
inline std::pair<double, double> sum_identities(const BasisParams& basis0, double phi, int n) {
  if (n < 1 || n > kMaxEnumerationDepth)
    throw std::invalid_argument("sum_identities depth must lie in [1, 22]");
  double s0 = 0.0, s1 = 0.0;
  enumerate_walk(basis0, phi, n, /*early_terminate=*/false, [&](const EnumerationNode& node) {
    if (!node.leaf) return;
    s0 += node.lam0_prod;
    s1 += node.lam1_prod;
  });
  return {std::abs(s0 - 1.0), std::abs(s1 - 1.0)};
}

struct ConvergenceRow {
  int n{};
  double gap{};        // |p_b0 - |alpha|^2|
  double cos_2n_phi{};
  double max_leaf_d{};
};

/// Tabulates the exact Born-rule gap against the deterministic decay factor
/// cos^{2n}(phi). The basis-continuity contribution has no closed form; the
/// table reports the empirical gap next to the factor that is computable.
inline std::vector<ConvergenceRow> convergence_table(const Ket2& state0, const BasisParams& basis0,
                                                     double phi, const std::vector<int>& n_list) {
  const double alpha_sq = std::norm(inner(basis_vectors(basis0).first, state0));
  std::vector<ConvergenceRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    const EnumerationResult r = enumerate_exact(state0, basis0, phi, n);
    rows.push_back({n, std::abs(r.p_b0 - alpha_sq), std::pow(std::cos(phi), 2.0 * n),
                    r.max_leaf_d});
  }
  return rows;
}

}  // namespace lossyq
