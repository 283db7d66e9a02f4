#pragma once

// Run configuration shared by the CLI and the Monte Carlo harness, with a
// canonical key=value text form that round-trips losslessly (17 significant
// digits for floating-point fields).

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lossyq/measurement.hpp"

namespace lossyq {

enum class Mode { kSimulate, kMonteCarlo, kEnumerate, kPovm, kValidate };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kSimulate: return "simulate";
    case Mode::kMonteCarlo: return "montecarlo";
    case Mode::kEnumerate: return "enumerate";
    case Mode::kPovm: return "povm";
    default: return "validate";
  }
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "simulate") return Mode::kSimulate;
  if (s == "montecarlo") return Mode::kMonteCarlo;
  if (s == "enumerate") return Mode::kEnumerate;
  if (s == "povm") return Mode::kPovm;
  if (s == "validate") return Mode::kValidate;
  throw std::invalid_argument("unknown mode: " + s);
}

/// Serializes a double with 17 significant digits (lossless round-trip).
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SimConfig {
  double phi = 0.5;         // weak-swap strength, open interval (0, pi/2)
  double basis_a = 1.0;     // target basis parameter a
  double chi = 0.0;         // target basis phase
  double alpha_sq = 0.5;    // |<b0|psi>|^2 of the initial state
  double psi_phase = 0.0;   // relative phase of the initial state in the basis
  int n_max = 200;          // step cap per trajectory
  double eta = 1e-6;        // basis-convergence early-stop tolerance
  long trials = 10000;
  std::uint64_t seed = 42;
  Mode mode = Mode::kSimulate;
  std::string out_path;     // output file prefix; empty disables file output
  std::string povm_path;    // POVM specification file (povm mode)
  int enum_depth = 10;      // enumeration depth (enumerate mode)
  int threads = 1;          // trial-level workers; results are independent of this
};

inline void validate_config(const SimConfig& cfg) {
  if (!(cfg.phi > 0.0 && cfg.phi < kPi / 2.0))
    throw std::invalid_argument("config: phi must lie in (0, pi/2)");
  if (!(cfg.basis_a >= 0.0 && cfg.basis_a <= 1.0))
    throw std::invalid_argument("config: basis_a must lie in [0,1]");
  if (!(cfg.alpha_sq >= 0.0 && cfg.alpha_sq <= 1.0))
    throw std::invalid_argument("config: alpha_sq must lie in [0,1]");
  if (!(cfg.eta > 0.0 && cfg.eta < 0.5))
    throw std::invalid_argument("config: eta must lie in (0, 1/2)");
  if (cfg.n_max < 1) throw std::invalid_argument("config: steps must be >= 1");
  if (cfg.trials < 0) throw std::invalid_argument("config: trials must be >= 0");
  if (cfg.enum_depth < 1) throw std::invalid_argument("config: depth must be >= 1");
  if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

/// The target measurement basis of a run.
inline BasisParams config_basis(const SimConfig& cfg) {
  BasisParams p{cfg.basis_a, is_computational(BasisParams{cfg.basis_a, 0.0}) ? 0.0
                                                                             : wrap_angle(cfg.chi)};
  return p;
}

/// Initial state sqrt(alpha_sq)|b0> + sqrt(1-alpha_sq) e^{i psi_phase}|b1>,
/// expressed in the computational basis.
inline Ket2 initial_state(const SimConfig& cfg) {
  const auto [b0, b1] = basis_vectors(config_basis(cfg));
  const Cx ca{std::sqrt(cfg.alpha_sq), 0.0};
  const Cx cb = std::polar(std::sqrt(std::max(0.0, 1.0 - cfg.alpha_sq)), cfg.psi_phase);
  return ca * b0 + cb * b1;
}

inline std::string config_to_text(const SimConfig& cfg) {
  std::ostringstream out;
  out << "mode=" << to_string(cfg.mode) << '\n'
      << "phi=" << fmt17(cfg.phi) << '\n'
      << "basis_a=" << fmt17(cfg.basis_a) << '\n'
      << "chi=" << fmt17(cfg.chi) << '\n'
      << "alpha_sq=" << fmt17(cfg.alpha_sq) << '\n'
      << "psi_phase=" << fmt17(cfg.psi_phase) << '\n'
      << "steps=" << cfg.n_max << '\n'
      << "eta=" << fmt17(cfg.eta) << '\n'
      << "trials=" << cfg.trials << '\n'
      << "seed=" << cfg.seed << '\n'
      << "depth=" << cfg.enum_depth << '\n'
      << "out=" << cfg.out_path << '\n'
      << "povm=" << cfg.povm_path << '\n';
  return out.str();
}

inline SimConfig config_from_text(const std::string& text) {
  SimConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    // trim
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = raw.find_last_not_of(" \t\r");
    raw = raw.substr(first, last - first + 1);

    const auto eq = raw.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line) + ": expected key=value");
    const std::string key = raw.substr(0, eq);
    const std::string val = raw.substr(eq + 1);
    try {
      if (key == "mode") cfg.mode = mode_from_string(val);
      else if (key == "phi") cfg.phi = std::stod(val);
      else if (key == "basis_a") cfg.basis_a = std::stod(val);
      else if (key == "chi") cfg.chi = std::stod(val);
      else if (key == "alpha_sq") cfg.alpha_sq = std::stod(val);
      else if (key == "psi_phase") cfg.psi_phase = std::stod(val);
      else if (key == "steps") cfg.n_max = std::stoi(val);
      else if (key == "eta") cfg.eta = std::stod(val);
      else if (key == "trials") cfg.trials = std::stol(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "depth") cfg.enum_depth = std::stoi(val);
      else if (key == "out") cfg.out_path = val;
      else if (key == "povm") cfg.povm_path = val;
      else if (key == "threads") cfg.threads = std::stoi(val);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line) + ": " + e.what());
    }
  }
  return cfg;
}

}  // namespace lossyq
