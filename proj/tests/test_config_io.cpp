#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lossyq/config.hpp"
#include "lossyq/io.hpp"
#include "lossyq/montecarlo.hpp"

using namespace lossyq;

TEST_CASE("fmt17 round-trips doubles losslessly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 0.7031099818247754, kPi, 2.2250738585072014e-308}) {
    CHECK(std::stod(fmt17(v)) == v);
    CHECK(std::stod(fmt17(-v)) == -v);
  }
}

TEST_CASE("config text round trip") {
  SimConfig cfg;
  cfg.phi = 0.4999999999999999;
  cfg.basis_a = 1.0 / 3.0;
  cfg.chi = -2.7182818284590451;
  cfg.alpha_sq = 0.55;
  cfg.psi_phase = 0.125;
  cfg.n_max = 77;
  cfg.eta = 1e-9;
  cfg.trials = 123456;
  cfg.seed = 18446744073709551615ull;
  cfg.mode = Mode::kMonteCarlo;
  cfg.out_path = "runs/batch_a";
  cfg.enum_depth = 14;

  const std::string text = config_to_text(cfg);
  const SimConfig back = config_from_text(text);
  CHECK(back.phi == cfg.phi);
  CHECK(back.basis_a == cfg.basis_a);
  CHECK(back.chi == cfg.chi);
  CHECK(back.alpha_sq == cfg.alpha_sq);
  CHECK(back.psi_phase == cfg.psi_phase);
  CHECK(back.n_max == cfg.n_max);
  CHECK(back.eta == cfg.eta);
  CHECK(back.trials == cfg.trials);
  CHECK(back.seed == cfg.seed);
  CHECK(back.mode == cfg.mode);
  CHECK(back.out_path == cfg.out_path);
  CHECK(back.enum_depth == cfg.enum_depth);
  // serialize(parse(text)) is a fixed point
  CHECK(config_to_text(back) == text);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  CHECK_NOTHROW(validate_config(cfg));
  SECTION("phi bounds") {
    cfg.phi = 0.0;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg.phi = kPi / 2.0;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
  }
  SECTION("eta bounds") {
    cfg.eta = 0.5;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg.eta = 0.0;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
  }
  SECTION("ranges") {
    cfg.basis_a = 1.5;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg.basis_a = 0.5;
    cfg.alpha_sq = -0.1;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
    cfg.alpha_sq = 0.5;
    cfg.n_max = 0;
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
  }
}

TEST_CASE("initial_state lives in the configured basis") {
  SimConfig cfg;
  cfg.basis_a = 0.8;
  cfg.chi = 0.3;
  cfg.alpha_sq = 0.55;
  cfg.psi_phase = 1.2;
  const Ket2 psi = initial_state(cfg);
  CHECK(norm_sq(psi) == Catch::Approx(1.0).margin(1e-14));
  const auto [b0, b1] = basis_vectors(config_basis(cfg));
  CHECK(std::norm(inner(b0, psi)) == Catch::Approx(0.55).margin(1e-14));
  CHECK(std::norm(inner(b1, psi)) == Catch::Approx(0.45).margin(1e-14));
}

TEST_CASE("output files") {
  SimConfig cfg;
  cfg.phi = 0.5;
  cfg.basis_a = 0.8;
  cfg.alpha_sq = 0.55;
  cfg.n_max = 30;
  cfg.seed = 11;

  SECTION("empty run emits header-only files") {
    cfg.trials = 0;
    const BatchResult batch = run_batch(cfg, /*keep_steps=*/true);
    std::ostringstream steps, trials;
    write_steps_jsonl(steps, cfg, batch);
    write_trials_csv(trials, cfg, batch);
    const std::string steps_text = steps.str();
    const std::string trials_text = trials.str();
    CHECK(steps_text.find("\"schema\":\"lossyq.steps.v1\"") != std::string::npos);
    // two header lines, nothing else
    CHECK(std::count(steps_text.begin(), steps_text.end(), '\n') == 2);
    CHECK(std::count(trials_text.begin(), trials_text.end(), '\n') == 3);
  }

  SECTION("one trial with three steps gives three JSONL lines and one CSV row") {
    cfg.trials = 1;
    cfg.n_max = 3;
    BatchResult batch = run_batch(cfg, /*keep_steps=*/true);
    REQUIRE(batch.steps.size() == 1);
    REQUIRE(batch.steps[0].size() == 3);  // no flip possible below: generic run capped at 3
    std::ostringstream steps, trials;
    write_steps_jsonl(steps, cfg, batch);
    write_trials_csv(trials, cfg, batch);
    const std::string steps_text = steps.str();
    const std::string trials_text = trials.str();
    CHECK(std::count(steps_text.begin(), steps_text.end(), '\n') == 2 + 3);
    CHECK(std::count(trials_text.begin(), trials_text.end(), '\n') == 3 + 1);
  }

  SECTION("re-running with the same config is byte-identical, at any thread count") {
    cfg.trials = 200;
    auto render = [&](int threads) {
      SimConfig c = cfg;
      c.threads = threads;
      const BatchResult batch = run_batch(c, /*keep_steps=*/true);
      std::ostringstream steps, trials;
      write_steps_jsonl(steps, c, batch);
      write_trials_csv(trials, c, batch);
      return steps.str() + "\x1e" + trials.str();
    };
    const std::string once = render(1);
    CHECK(render(1) == once);
    CHECK(render(2) == once);
    CHECK(render(4) == once);
  }
}

TEST_CASE("aggregate statistics") {
  std::vector<TrialSummary> rows(4);
  rows[0] = {0, Conclusion::kB0, 0, 10, 0.0, 0.5};
  rows[1] = {1, Conclusion::kB0, 0, 20, 0.0, 0.5};
  rows[2] = {2, Conclusion::kB1, 0, 30, 0.0, 0.5};
  rows[3] = {3, Conclusion::kUndecided, 0, 40, 0.0, 0.5};
  const Aggregate a = aggregate(rows);
  CHECK(a.count_b0 == 2);
  CHECK(a.count_b1 == 1);
  CHECK(a.count_undecided == 1);
  CHECK(a.freq_b0 == 0.5);
  CHECK(a.stderr_b0 == Catch::Approx(std::sqrt(0.25 / 4.0)));
  CHECK(a.mean_steps == 25.0);
}
