#pragma once

// Seeded Monte Carlo batches over independent trajectories. Every trial owns
// the substream RandomStream(seed, trial), so results are bit-identical for
// a fixed (seed, config) no matter how many workers run the batch; the only
// shared state is the preallocated result slot each trial writes.

#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "lossyq/config.hpp"
#include "lossyq/povm.hpp"
#include "lossyq/trajectory.hpp"

namespace lossyq {

struct TrialSummary {
  long trial{};
  Conclusion conclusion{Conclusion::kUndecided};
  int povm_outcome{};  // j in 1..m for POVM runs, 0 otherwise
  int steps{};
  double final_d{};
  double eps_abs{};
};

struct Aggregate {
  long trials{};
  long count_b0{}, count_b1{}, count_undecided{};
  double freq_b0{}, freq_b1{}, freq_undecided{};
  double stderr_b0{}, stderr_b1{};
  double mean_steps{};
  std::vector<long> povm_counts;   // index j-1, POVM runs only
  std::vector<double> povm_freqs;
  std::vector<double> povm_stderrs;
};

inline double binomial_stderr(double freq, long trials) {
  return trials > 0 ? std::sqrt(freq * (1.0 - freq) / static_cast<double>(trials)) : 0.0;
}

inline Aggregate aggregate(const std::vector<TrialSummary>& rows) {
  Aggregate a;
  a.trials = static_cast<long>(rows.size());
  int m = 0;
  double steps_sum = 0.0;
  for (const TrialSummary& r : rows) m = std::max(m, r.povm_outcome);
  a.povm_counts.assign(static_cast<std::size_t>(m), 0);
  for (const TrialSummary& r : rows) {
    switch (r.conclusion) {
      case Conclusion::kB0: ++a.count_b0; break;
      case Conclusion::kB1: ++a.count_b1; break;
      default: ++a.count_undecided; break;
    }
    if (r.povm_outcome > 0) ++a.povm_counts[static_cast<std::size_t>(r.povm_outcome - 1)];
    steps_sum += r.steps;
  }
  if (a.trials > 0) {
    const double n = static_cast<double>(a.trials);
    a.freq_b0 = a.count_b0 / n;
    a.freq_b1 = a.count_b1 / n;
    a.freq_undecided = a.count_undecided / n;
    a.stderr_b0 = binomial_stderr(a.freq_b0, a.trials);
    a.stderr_b1 = binomial_stderr(a.freq_b1, a.trials);
    a.mean_steps = steps_sum / n;
    for (long c : a.povm_counts) {
      const double f = c / n;
      a.povm_freqs.push_back(f);
      a.povm_stderrs.push_back(binomial_stderr(f, a.trials));
    }
  }
  return a;
}

struct BatchResult {
  std::vector<TrialSummary> summaries;          // ordered by trial index
  std::vector<std::vector<StepRecord>> steps;   // per trial; kept on request
  Aggregate agg;
};

namespace detail {

template <class TrialFn>
void for_each_trial(long trials, int threads, TrialFn&& fn) {
  if (threads <= 1 || trials < 2) {
    for (long t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([=, &fn, &error, &error_mutex]() {
      try {
        for (long t = w; t < trials; t += threads) fn(t);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Runs cfg.trials independent trajectories of the projective protocol.
inline BatchResult run_batch(const SimConfig& cfg, bool keep_steps = false) {
  validate_config(cfg);
  const BasisParams basis = config_basis(cfg);
  const Ket2 state0 = initial_state(cfg);

  BatchResult out;
  out.summaries.resize(static_cast<std::size_t>(cfg.trials));
  if (keep_steps) out.steps.resize(static_cast<std::size_t>(cfg.trials));

  detail::for_each_trial(cfg.trials, cfg.threads, [&](long trial) {
    RandomStream rng(cfg.seed, static_cast<std::uint64_t>(trial));
    Trajectory t = run_trajectory(state0, basis, cfg.phi, cfg.n_max, cfg.eta, rng);
    TrialSummary& s = out.summaries[static_cast<std::size_t>(trial)];
    s.trial = trial;
    s.conclusion = t.conclusion;
    s.steps = static_cast<int>(t.steps.size());
    s.final_d = basis_distance(t.final_basis);
    s.eps_abs = std::abs(t.eps);
    if (keep_steps) out.steps[static_cast<std::size_t>(trial)] = std::move(t.steps);
  });
  out.agg = aggregate(out.summaries);
  return out;
}

/// Runs cfg.trials independent POVM measurements (projective stage in the
/// POVM eigenbasis, then the conditioned draw).
inline BatchResult run_povm_batch(const SimConfig& cfg, const CommutingPOVM& povm,
                                  bool keep_steps = false) {
  validate_config(cfg);
  validate_povm(povm);
  SimConfig stage = cfg;
  stage.basis_a = povm.basis.a;
  stage.chi = povm.basis.chi;
  const Ket2 state0 = initial_state(stage);

  BatchResult out;
  out.summaries.resize(static_cast<std::size_t>(cfg.trials));
  if (keep_steps) out.steps.resize(static_cast<std::size_t>(cfg.trials));

  detail::for_each_trial(cfg.trials, cfg.threads, [&](long trial) {
    RandomStream rng(cfg.seed, static_cast<std::uint64_t>(trial));
    Trajectory t = run_trajectory(state0, povm.basis, cfg.phi, cfg.n_max, cfg.eta, rng);
    if (t.conclusion == Conclusion::kUndecided)
      throw std::runtime_error("undecided projective stage");
    const int j = sample_final(t.conclusion, povm, rng.next_unit());
    TrialSummary& s = out.summaries[static_cast<std::size_t>(trial)];
    s.trial = trial;
    s.conclusion = t.conclusion;
    s.povm_outcome = j;
    s.steps = static_cast<int>(t.steps.size());
    s.final_d = basis_distance(t.final_basis);
    s.eps_abs = std::abs(t.eps);
    if (keep_steps) out.steps[static_cast<std::size_t>(trial)] = std::move(t.steps);
  });
  out.agg = aggregate(out.summaries);
  return out;
}

}  // namespace lossyq
