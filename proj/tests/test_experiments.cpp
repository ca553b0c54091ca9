#include <doctest.h>

#include <numbers>
#include <sstream>

#include "hlm/experiments.hpp"

using namespace hlm;

namespace {

ExperimentConfig lines_config() {
  const nlohmann::json j = {{"K", 2},
                            {"D", 2},
                            {"d", 1},
                            {"truth_angles_deg", {10.0, 70.0}},
                            {"alphas", {0.2, 0.4, 0.4}},
                            {"p", {1.0}},
                            {"N", 300},
                            {"trials", 3},
                            {"grid_step_deg", 1.0},
                            {"seed", 5}};
  return config_from_json(j);
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_WITH_AS(config_from_json({{"K", 2}, {"D", 2}, {"d", 1}, {"triels", 3}}),
                       doctest::Contains("triels"), Error);
  CHECK_THROWS_AS(config_from_json({{"K", 2}, {"D", 2}, {"d", 1}, {"trials", 0}}), Error);
  CHECK_THROWS_AS(config_from_json({{"K", 2}, {"D", 2}, {"d", 1}, {"p", {1.0, -1.0}}}), Error);
  CHECK_THROWS_AS(config_from_json({{"K", 2}, {"D", 2}, {"d", 1}, {"optimizer", "magic"}}), Error);
}

TEST_CASE("config round trip and hash") {
  const ExperimentConfig c = lines_config();
  const ExperimentConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  ExperimentConfig other = c;
  other.seed = 6;
  CHECK(config_hash(other) != config_hash(c));
  REQUIRE(back.model.has_value());
  CHECK(*back.model == *c.model);
}

TEST_CASE("a one-cell sweep equals one trial") {
  ExperimentConfig c = lines_config();
  c.trials = 1;
  const SweepResult s = phase_transition_sweep(c);
  REQUIRE(s.rows.size() == 1);
  const TrialResult t = run_trial(c, sweep_cells(c).front(), 0);
  CHECK(s.rows[0].recovery_dist == t.recovery_dist);
  CHECK(s.rows[0].energy_found == t.energy_found);
  CHECK(s.rows[0].seed == derive_seed(c.seed, 0));
}

TEST_CASE("sweep cells enumerate the grid") {
  ExperimentConfig c = lines_config();
  c.p_values = {0.5, 1.0};
  c.alpha0_values = {0.0, 0.1, 0.2};
  c.n_values = {100, 200};
  CHECK(sweep_cells(c).size() == 12);
}

TEST_CASE("sweeps are deterministic across worker counts") {
  ExperimentConfig c = lines_config();
  c.p_values = {1.0, 2.0};
  const SweepResult a = phase_transition_sweep(c, 1);
  const SweepResult b = phase_transition_sweep(c, 3);
  CHECK(results_csv(a.rows) == results_csv(b.rows));
  CHECK(results_jsonl(a.rows) == results_jsonl(b.rows));
  CHECK(summary_json(a) == summary_json(b));
}

TEST_CASE("csv layout") {
  const SweepResult s = phase_transition_sweep(lines_config());
  std::istringstream in(results_csv(s.rows));
  std::string header;
  std::getline(in, header);
  CHECK(header == "trial,seed,p,alpha0,eps,N,recovery_dist,energy_found,energy_truth,success,wall_ms,method");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    CHECK(line.substr(line.rfind(',') + 1) == "grid-oracle");
  }
  CHECK(n == 3);
}

TEST_CASE("aggregates match the rows") {
  ExperimentConfig c = lines_config();
  c.alpha0_values = {0.1, 0.2};
  const SweepResult s = phase_transition_sweep(c);
  for (const CellSummary& cell : s.cells) {
    std::size_t wins = 0;
    double sum = 0.0;
    for (const TrialResult& r : s.rows) {
      if (r.cell.alpha0 == cell.cell.alpha0) {
        wins += r.success;
        sum += r.recovery_dist;
      }
    }
    CHECK(cell.successes == wins);
    CHECK(cell.mean_dist == doctest::Approx(sum / cell.trials));
    CHECK(cell.ci95.lo <= cell.success_rate);
    CHECK(cell.ci95.hi >= cell.success_rate);
  }
}

TEST_CASE("trial preconditions") {
  ExperimentConfig c = lines_config();
  c.experiment = ExperimentKind::theorem1;
  // alpha0 = 0.2 violates the exact-recovery condition.
  CHECK_THROWS_AS(run_trial(c, sweep_cells(c).front(), 0), Error);
  c.override_condition = true;
  CHECK_NOTHROW(run_trial(c, sweep_cells(c).front(), 0));

  c.experiment = ExperimentKind::theorem3;
  CHECK_THROWS_AS(run_trial(c, sweep_cells(c).front(), 0), Error);

  c.experiment = ExperimentKind::theorem2;
  CHECK_THROWS_AS(run_trial(c, sweep_cells(c).front(), 0), Error);
}

TEST_CASE("truth-seeded fits never lose to the truth") {
  ExperimentConfig c = config_from_json({{"K", 2},
                                         {"D", 3},
                                         {"d", 1},
                                         {"truth", {{1.0, 0.0, 0.0}, {0.0, 0.6, 0.8}}},
                                         {"alphas", {0.2, 0.4, 0.4}},
                                         {"p", {1.0}},
                                         {"N", 200},
                                         {"trials", 4},
                                         {"restarts", 3}});
  const SweepResult s = phase_transition_sweep(c);
  for (const TrialResult& r : s.rows) {
    CHECK(r.method == "multi-restart+truth-seeded");
    CHECK(r.truth_not_better == (r.energy_truth <= r.energy_found + 1e-12));
    CHECK(r.energy_found <= r.energy_truth + 1e-12);
  }
}

TEST_CASE("svg renderings") {
  ExperimentConfig c = lines_config();
  c.alpha0_values = {0.0, 0.2};
  c.trials = 1;
  const SweepResult s = phase_transition_sweep(c);
  CHECK(svg_heatmap(s).rfind("<svg", 0) == 0);
  CHECK(svg_distance_plot(s).find("</svg>") != std::string::npos);
}

TEST_CASE("bounds report flags the lower bound") {
  ExperimentConfig c = lines_config();
  c.p_values = {1.0, 2.0};
  c.mc_budget = 2000;
  const nlohmann::json r = bounds_report(c);
  const auto& p1 = r.at("per_p").at(0);
  CHECK(p1.at("tau0").get<double>() == doctest::Approx(0.25 / std::numbers::pi));
  CHECK(p1.at("tau0_lower_bound").get<double>() == doctest::Approx(0.125));
  CHECK(p1.at("lower_bound_exceeds_tau0").get<bool>());
  CHECK(p1.at("condition").contains("rhs"));
  CHECK(r.at("per_p").at(1).contains("delta_kappa"));
}

TEST_CASE("property suite passes at the default seed") {
  const PropertyReport report = property_suite(kDefaultSeed);
  for (const PropertyCheck& c : report.checks) {
    INFO(c.module << "/" << c.name << ": " << c.detail);
    CHECK(c.passed);
    CHECK(c.margin >= 0.0);
  }
  CHECK(report.checks.size() >= 20);
  CHECK(report.to_json().at("checks").size() == report.checks.size());
}
