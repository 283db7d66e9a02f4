// lossyq: simulator and verification harness for feedback-controlled
// destructive weak measurements of a qubit.
//
// Subcommands:
//   simulate    run trajectories and write per-step JSONL + per-trial CSV
//   montecarlo  run a trial batch and report conclusion statistics
//   enumerate   exact outcome-tree enumeration and convergence table
//   povm        commuting-element POVM via projective stage + postprocessing
//   validate    run the full invariant suite
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
// 3 validation-suite failure.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lossyq/config.hpp"
#include "lossyq/enumeration.hpp"
#include "lossyq/io.hpp"
#include "lossyq/montecarlo.hpp"
#include "lossyq/povm.hpp"
#include "lossyq/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

void add_common_flags(CLI::App* cmd, lossyq::SimConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "load defaults from a key=value config file");
  cmd->add_option("--phi", cfg.phi, "weak-swap strength, in (0, pi/2)");
  cmd->add_option("--basis-a", cfg.basis_a, "target basis parameter a in [0,1]");
  cmd->add_option("--chi", cfg.chi, "target basis phase chi");
  cmd->add_option("--alpha-sq", cfg.alpha_sq, "|<b0|psi>|^2 of the initial state");
  cmd->add_option("--psi-phase", cfg.psi_phase, "relative phase of the initial state");
  cmd->add_option("--steps", cfg.n_max, "maximum steps per trajectory");
  cmd->add_option("--eta", cfg.eta, "basis-convergence stop tolerance, in (0, 1/2)");
  cmd->add_option("--trials", cfg.trials, "number of Monte Carlo trials");
  cmd->add_option("--seed", cfg.seed, "base RNG seed");
  cmd->add_option("--threads", cfg.threads, "worker threads (results are thread-count independent)");
  cmd->add_option("--out", cfg.out_path, "output file prefix");
}

lossyq::SimConfig merge_config_file(const lossyq::SimConfig& flags_cfg, const CLI::App* cmd,
                                    const std::string& config_path) {
  if (config_path.empty()) return flags_cfg;
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + config_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  lossyq::SimConfig cfg = lossyq::config_from_text(buf.str());
  // explicit flags override file values
  auto take = [&](const char* name, auto member) {
    if (cmd->count(name) > 0) cfg.*member = flags_cfg.*member;
  };
  take("--phi", &lossyq::SimConfig::phi);
  take("--basis-a", &lossyq::SimConfig::basis_a);
  take("--chi", &lossyq::SimConfig::chi);
  take("--alpha-sq", &lossyq::SimConfig::alpha_sq);
  take("--psi-phase", &lossyq::SimConfig::psi_phase);
  take("--steps", &lossyq::SimConfig::n_max);
  take("--eta", &lossyq::SimConfig::eta);
  take("--trials", &lossyq::SimConfig::trials);
  take("--seed", &lossyq::SimConfig::seed);
  take("--threads", &lossyq::SimConfig::threads);
  take("--out", &lossyq::SimConfig::out_path);
  return cfg;
}

void print_aggregate(const lossyq::Aggregate& a) {
  std::cout << "trials " << a.trials << "\n";
  std::cout << "B0 " << a.count_b0 << " freq " << lossyq::fmt17(a.freq_b0) << " stderr "
            << lossyq::fmt17(a.stderr_b0) << "\n";
  std::cout << "B1 " << a.count_b1 << " freq " << lossyq::fmt17(a.freq_b1) << " stderr "
            << lossyq::fmt17(a.stderr_b1) << "\n";
  if (a.count_undecided > 0) std::cout << "UNDECIDED " << a.count_undecided << "\n";
  for (std::size_t j = 0; j < a.povm_freqs.size(); ++j) {
    std::cout << "outcome " << (j + 1) << " count " << a.povm_counts[j] << " freq "
              << lossyq::fmt17(a.povm_freqs[j]) << " stderr " << lossyq::fmt17(a.povm_stderrs[j])
              << "\n";
  }
  std::cout << "mean steps " << lossyq::fmt17(a.mean_steps) << "\n";
}

int run_simulate(lossyq::SimConfig cfg, bool keep_steps) {
  lossyq::validate_config(cfg);
  const lossyq::BatchResult batch = lossyq::run_batch(cfg, keep_steps);
  if (!cfg.out_path.empty()) {
    if (keep_steps) {
      auto jout = lossyq::detail::open_out(cfg.out_path + ".steps.jsonl");
      lossyq::write_steps_jsonl(jout, cfg, batch);
    }
    auto cout_file = lossyq::detail::open_out(cfg.out_path + ".trials.csv");
    lossyq::write_trials_csv(cout_file, cfg, batch);
  }
  print_aggregate(batch.agg);
  return kExitOk;
}

int run_enumerate(lossyq::SimConfig cfg, const std::vector<int>& depths, bool per_string) {
  lossyq::validate_config(cfg);
  const lossyq::BasisParams basis = lossyq::config_basis(cfg);
  const lossyq::Ket2 state0 = lossyq::initial_state(cfg);

  std::vector<int> n_list = depths;
  if (n_list.empty()) n_list.push_back(cfg.enum_depth);
  std::vector<lossyq::EnumerationResult> results;
  results.reserve(n_list.size());
  for (int n : n_list)
    results.push_back(lossyq::enumerate_exact(state0, basis, cfg.phi, n, per_string));

  for (const auto& r : results) {
    std::cout << "n " << r.n << " p_b0 " << lossyq::fmt17(r.p_b0) << " p_b1 "
              << lossyq::fmt17(r.p_b1) << " p_undecided " << lossyq::fmt17(r.p_undecided)
              << " gap " << lossyq::fmt17(std::abs(r.p_b0 - cfg.alpha_sq)) << " sum_l0_dev "
              << lossyq::fmt17(std::abs(r.sum_lambda0 - 1.0)) << " sum_l1_dev "
              << lossyq::fmt17(std::abs(r.sum_lambda1 - 1.0)) << " max_leaf_d "
              << lossyq::fmt17(r.max_leaf_d) << "\n";
  }
  if (!cfg.out_path.empty()) {
    auto out = lossyq::detail::open_out(cfg.out_path + ".enum.csv");
    lossyq::write_enum_csv(out, cfg, results, cfg.alpha_sq);
    if (per_string) {
      auto sout = lossyq::detail::open_out(cfg.out_path + ".strings.csv");
      lossyq::write_strings_csv(sout, cfg, results.back());
    }
  }
  return kExitOk;
}

int run_povm(lossyq::SimConfig cfg) {
  lossyq::validate_config(cfg);
  if (cfg.povm_path.empty()) throw std::invalid_argument("povm mode needs --povm FILE");
  const lossyq::CommutingPOVM povm = lossyq::load_povm_file(cfg.povm_path);
  const lossyq::BatchResult batch = lossyq::run_povm_batch(cfg, povm);

  lossyq::SimConfig stage = cfg;
  stage.basis_a = povm.basis.a;
  stage.chi = povm.basis.chi;
  const std::vector<double> exact = lossyq::exact_povm_probs(lossyq::initial_state(stage), povm);
  print_aggregate(batch.agg);
  for (std::size_t j = 0; j < exact.size(); ++j)
    std::cout << "exact P" << (j + 1) << " " << lossyq::fmt17(exact[j]) << "\n";

  if (!cfg.out_path.empty()) {
    auto out = lossyq::detail::open_out(cfg.out_path + ".trials.csv");
    lossyq::write_trials_csv(out, stage, batch);
  }
  return kExitOk;
}

int run_validate(const lossyq::SimConfig& cfg) {
  const std::vector<lossyq::CheckResult> checks = lossyq::run_validation_suite(cfg.seed);
  const std::string report = lossyq::format_report(checks);
  std::cout << report;
  if (!cfg.out_path.empty()) {
    auto out = lossyq::detail::open_out(cfg.out_path + ".validate.txt");
    out << report;
  }
  if (!lossyq::all_passed(checks)) {
    std::cerr << "validation suite failed\n";
    return kExitValidation;
  }
  std::cout << "all checks passed\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"destructive weak-measurement simulator for qubits"};
  app.require_subcommand(1);

  lossyq::SimConfig cfg;
  std::string config_path;
  std::vector<int> depths;
  bool per_string = false;

  CLI::App* sim = app.add_subcommand("simulate", "run trajectories with per-step logging");
  add_common_flags(sim, cfg, config_path);

  CLI::App* mc = app.add_subcommand("montecarlo", "run a batch and report statistics");
  add_common_flags(mc, cfg, config_path);

  CLI::App* en = app.add_subcommand("enumerate", "exact outcome-tree enumeration");
  add_common_flags(en, cfg, config_path);
  en->add_option("--depth", cfg.enum_depth, "enumeration depth");
  en->add_option("--depths", depths, "comma-separated depth list for the convergence table")
      ->delimiter(',');
  en->add_flag("--per-string", per_string, "emit the per-string table (2^n rows)");

  CLI::App* pv = app.add_subcommand("povm", "commuting-element POVM measurement");
  add_common_flags(pv, cfg, config_path);
  pv->add_option("--povm", cfg.povm_path, "POVM specification file")->required();

  CLI::App* va = app.add_subcommand("validate", "run the invariant suite");
  add_common_flags(va, cfg, config_path);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    lossyq::SimConfig merged = merge_config_file(cfg, active, config_path);
    if (active == sim) {
      merged.mode = lossyq::Mode::kSimulate;
      return run_simulate(merged, /*keep_steps=*/true);
    }
    if (active == mc) {
      merged.mode = lossyq::Mode::kMonteCarlo;
      return run_simulate(merged, /*keep_steps=*/false);
    }
    if (active == en) {
      merged.mode = lossyq::Mode::kEnumerate;
      if (active->count("--depth") > 0) merged.enum_depth = cfg.enum_depth;
      return run_enumerate(merged, depths, per_string);
    }
    if (active == pv) {
      merged.mode = lossyq::Mode::kPovm;
      merged.povm_path = cfg.povm_path;
      return run_povm(merged);
    }
    merged.mode = lossyq::Mode::kValidate;
    return run_validate(merged);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
