#pragma once

// Structured output: JSONL step logs and CSV summaries. Field order is fixed
// and floating-point values carry 17 significant digits, so a re-run with
// the same seed and config produces byte-identical files.

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lossyq/config.hpp"
#include "lossyq/enumeration.hpp"
#include "lossyq/montecarlo.hpp"

namespace lossyq {

inline constexpr const char* kStepsSchema = "lossyq.steps.v1";
inline constexpr const char* kTrialsSchema = "lossyq.trials.v1";
inline constexpr const char* kEnumSchema = "lossyq.enum.v1";
inline constexpr const char* kStringsSchema = "lossyq.strings.v1";

namespace detail {

inline std::string config_comment(const SimConfig& cfg) {
  std::string text = config_to_text(cfg);
  for (char& c : text)
    if (c == '\n') c = ' ';
  if (!text.empty() && text.back() == ' ') text.pop_back();
  return text;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

}  // namespace detail

/// One JSON object per step. Line 1 is the schema header, line 2 the config.
inline void write_steps_jsonl(std::ostream& out, const SimConfig& cfg, const BatchResult& batch) {
  out << "{\"schema\":\"" << kStepsSchema << "\"}\n";
  out << "{\"config\":\"" << detail::config_comment(cfg) << "\"}\n";
  for (std::size_t trial = 0; trial < batch.steps.size(); ++trial) {
    for (const StepRecord& s : batch.steps[trial]) {
      out << "{\"trial\":" << trial << ",\"step\":" << s.index << ",\"outcome\":" << s.outcome
          << ",\"p\":" << fmt17(s.prob) << ",\"lam_b0\":" << fmt17(s.lam_b0)
          << ",\"lam_b1\":" << fmt17(s.lam_b1) << ",\"a\":" << fmt17(s.basis_after.a)
          << ",\"chi\":" << fmt17(s.basis_after.chi)
          << ",\"d_basis\":" << fmt17(basis_distance(s.basis_after))
          << ",\"abs_eps\":" << fmt17(s.abs_eps) << "}\n";
    }
  }
}

/// One TrialSummary row per trial. POVM runs put the outcome index in the
/// conclusion column.
inline void write_trials_csv(std::ostream& out, const SimConfig& cfg, const BatchResult& batch) {
  out << "# schema=" << kTrialsSchema << "\n";
  out << "# " << detail::config_comment(cfg) << "\n";
  out << "trial,conclusion,steps,final_d,eps_abs\n";
  for (const TrialSummary& s : batch.summaries) {
    out << s.trial << ',';
    if (s.povm_outcome > 0)
      out << s.povm_outcome;
    else
      out << to_string(s.conclusion);
    out << ',' << s.steps << ',' << fmt17(s.final_d) << ',' << fmt17(s.eps_abs) << '\n';
  }
}

/// Plot-ready convergence table: one row per enumerated depth.
inline void write_enum_csv(std::ostream& out, const SimConfig& cfg,
                           const std::vector<EnumerationResult>& results, double alpha_sq) {
  out << "# schema=" << kEnumSchema << "\n";
  out << "# " << detail::config_comment(cfg) << "\n";
  out << "n,p_b0,p_b1,p_undecided,gap,cos_2n_phi,max_leaf_d,sum_lambda0_dev,sum_lambda1_dev\n";
  for (const EnumerationResult& r : results) {
    out << r.n << ',' << fmt17(r.p_b0) << ',' << fmt17(r.p_b1) << ',' << fmt17(r.p_undecided)
        << ',' << fmt17(std::abs(r.p_b0 - alpha_sq)) << ','
        << fmt17(std::pow(std::cos(cfg.phi), 2.0 * r.n)) << ',' << fmt17(r.max_leaf_d) << ','
        << fmt17(std::abs(r.sum_lambda0 - 1.0)) << ',' << fmt17(std::abs(r.sum_lambda1 - 1.0))
        << '\n';
  }
}

/// Per-string table of one enumeration (opt-in; 2^n rows).
inline void write_strings_csv(std::ostream& out, const SimConfig& cfg,
                              const EnumerationResult& r) {
  out << "# schema=" << kStringsSchema << "\n";
  out << "# " << detail::config_comment(cfg) << "\n";
  out << "string,probability,final_d\n";
  for (const EnumerationResult::StringStat& s : r.per_string) {
    std::string bits(static_cast<std::size_t>(s.len), '0');
    for (int i = 0; i < s.len; ++i)
      if (s.bits & (1u << i)) bits[static_cast<std::size_t>(i)] = '1';
    out << bits << ',' << fmt17(s.prob) << ',' << fmt17(s.final_d) << '\n';
  }
}

}  // namespace lossyq
