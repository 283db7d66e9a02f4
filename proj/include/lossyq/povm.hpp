#pragma once

// Commuting-element POVMs as a projective measurement in the common
// eigenbasis followed by conditioned classical sampling. The weights form a
// column-stochastic m x 2 table: w[j][0] is the eigenvalue of element j on
// |b0>, w[j][1] on |b1>, and each column sums to 1.

#include <array>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossyq/measurement.hpp"
#include "lossyq/trajectory.hpp"

namespace lossyq {

struct CommutingPOVM {
  BasisParams basis{};
  std::vector<std::array<double, 2>> weights;  // {w_j0, w_j1}, j = 1..m
};

/// Enforces the POVM invariants; the exception message names the violated
/// constraint.
inline void validate_povm(const CommutingPOVM& p) {
  if (p.weights.size() < 2)
    throw std::invalid_argument("povm needs at least 2 outcomes, got " +
                                std::to_string(p.weights.size()));
  if (!(p.basis.a >= 0.0 && p.basis.a <= 1.0))
    throw std::invalid_argument("povm basis parameter a out of range [0,1]");
  double col0 = 0.0, col1 = 0.0;
  for (std::size_t j = 0; j < p.weights.size(); ++j) {
    for (int i = 0; i < 2; ++i) {
      const double w = p.weights[j][i];
      if (!(w >= 0.0 && w <= 1.0)) {
        std::ostringstream msg;
        msg << "povm weight w[" << (j + 1) << "][" << i << "] = " << w
            << " out of range [0,1]";
        throw std::invalid_argument(msg.str());
      }
    }
    col0 += p.weights[j][0];
    col1 += p.weights[j][1];
  }
  if (std::abs(col0 - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "povm column 0 sums to " << col0 << ", expected 1";
    throw std::invalid_argument(msg.str());
  }
  if (std::abs(col1 - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "povm column 1 sums to " << col1 << ", expected 1";
    throw std::invalid_argument(msg.str());
  }
}

/// Inverse-CDF sampling over the column selected by the projective outcome;
/// cumulative sums in index order, half-open intervals. Returns j in 1..m.
inline int sample_final(Conclusion projective, const CommutingPOVM& p, double u) {
  if (projective == Conclusion::kUndecided)
    throw std::invalid_argument("sample_final: projective outcome must be B0 or B1");
  const int col = (projective == Conclusion::kB0) ? 0 : 1;
  double cum = 0.0;
  for (std::size_t j = 0; j < p.weights.size(); ++j) {
    cum += p.weights[j][col];
    if (u < cum) return static_cast<int>(j + 1);
  }
  return static_cast<int>(p.weights.size());  // u landed in roundoff slack
}

/// Exact outcome probabilities P_j = w_j0 |alpha|^2 + w_j1 |beta|^2 with the
/// amplitudes taken in the POVM eigenbasis.
inline std::vector<double> exact_povm_probs(const Ket2& state, const CommutingPOVM& p) {
  if (!is_normalized(state)) throw std::invalid_argument("exact_povm_probs: state not normalized");
  const auto [b0, b1] = basis_vectors(p.basis);
  const double a2 = std::norm(inner(b0, state));
  const double b2 = std::norm(inner(b1, state));
  std::vector<double> probs;
  probs.reserve(p.weights.size());
  for (const auto& w : p.weights) probs.push_back(w[0] * a2 + w[1] * b2);
  return probs;
}

/// Full POVM measurement: projective protocol in the eigenbasis, then one
/// conditioned draw. The intermediate projective outcome and the random
/// numbers are not part of the result. Returns j in 1..m.
inline int run_povm_measurement(const Ket2& state, const CommutingPOVM& p, double phi, int n_max,
                                double eta, RandomStream& rng) {
  validate_povm(p);
  const Trajectory t = run_trajectory(state, p.basis, phi, n_max, eta, rng);
  if (t.conclusion == Conclusion::kUndecided)
    throw std::runtime_error("undecided projective stage");
  return sample_final(t.conclusion, p, rng.next_unit());
}

// ------------------------------------------------------------ file format
//
// Line-oriented plain text. '#' starts a comment; blank lines are ignored.
//
//   basis_a   0.8
//   basis_chi 0.3
//   weight    0.5 0.2
//   weight    0.3 0.3
//   weight    0.2 0.5
//
// One `weight` line per outcome, in outcome order. Parse errors cite the
// line number and field.

namespace detail {

inline double parse_number(const std::string& token, int line, const char* field) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size()) {
    std::ostringstream msg;
    msg << "povm file line " << line << ": field '" << field << "': '" << token
        << "' is not a number";
    throw std::invalid_argument(msg.str());
  }
  return v;
}

}  // namespace detail

inline CommutingPOVM parse_povm_text(const std::string& text) {
  CommutingPOVM p;
  bool saw_a = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream row(raw);
    std::string key;
    if (!(row >> key)) continue;

    std::string t1, t2, extra;
    if (key == "basis_a") {
      if (!(row >> t1)) throw std::invalid_argument("povm file line " + std::to_string(line) +
                                                    ": field 'basis_a': missing value");
      p.basis.a = detail::parse_number(t1, line, "basis_a");
      saw_a = true;
    } else if (key == "basis_chi") {
      if (!(row >> t1)) throw std::invalid_argument("povm file line " + std::to_string(line) +
                                                    ": field 'basis_chi': missing value");
      p.basis.chi = detail::parse_number(t1, line, "basis_chi");
    } else if (key == "weight") {
      if (!(row >> t1 >> t2))
        throw std::invalid_argument("povm file line " + std::to_string(line) +
                                    ": field 'weight': expected two values");
      const double w0 = detail::parse_number(t1, line, "weight[0]");
      const double w1 = detail::parse_number(t2, line, "weight[1]");
      p.weights.push_back({w0, w1});
    } else {
      throw std::invalid_argument("povm file line " + std::to_string(line) + ": unknown field '" +
                                  key + "'");
    }
    if (row >> extra)
      throw std::invalid_argument("povm file line " + std::to_string(line) + ": field '" + key +
                                  "': unexpected trailing token '" + extra + "'");
  }
  if (!saw_a) throw std::invalid_argument("povm file: field 'basis_a' is required");
  if (p.weights.empty()) throw std::invalid_argument("povm file: no 'weight' lines");
  validate_povm(p);
  return p;
}

inline CommutingPOVM load_povm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open povm file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_povm_text(buf.str());
}

}  // namespace lossyq
