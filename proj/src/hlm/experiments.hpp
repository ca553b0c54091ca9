#pragma once

// Desk-scale experiments: single trials for each recovery claim, the
// (p, alpha_0, eps, N) sweep with its tables, bound reports and the property
// suite.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlm/common.hpp"
#include "hlm/grassmann.hpp"
#include "hlm/model.hpp"
#include "hlm/optimize.hpp"

namespace hlm {

enum class ExperimentKind { plain, theorem1, theorem2, theorem3, fig1 };

// auto: grid oracle when (D, d, K) allows it, otherwise multi-restart plus
// truth-seeded descent.
enum class OptimizerKind { automatic, grid_oracle, multi_restart, truth_seeded };

struct ExperimentConfig {
  // Absent when the config only names K, D and d (fitting external data).
  std::optional<HLMModel> model;
  int K = 0;
  int D = 0;
  int d = 0;
  ExperimentKind experiment = ExperimentKind::plain;
  std::vector<double> p_values{1.0};
  std::vector<double> alpha0_values;  // empty: the model's alpha_0
  std::vector<double> eps_values;     // empty: the model's noise level
  std::vector<std::size_t> n_values{2000};
  std::size_t trials = 1;
  OptimizerKind optimizer = OptimizerKind::automatic;
  std::size_t restarts = 8;
  GridSpec grid;
  int max_iter = 200;
  double tol = 1e-12;
  double success_tol_deg = 0.01;
  double kappa_threshold = 0.02;
  bool override_condition = false;
  bool record_wall_time = false;
  std::size_t mc_budget = 100000;
  std::optional<std::string> data;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
  const HLMModel& require_model() const;
};

// Flat keys: the model keys plus the run keys below. Unknown keys are config
// errors naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
const std::vector<std::string>& run_keys();
std::uint64_t config_hash(const ExperimentConfig& c);

const char* to_string(ExperimentKind kind);
const char* to_string(OptimizerKind kind);

struct Cell {
  double p = 1.0;
  double alpha0 = 0.0;
  double eps = 0.0;
  std::size_t n = 0;
};

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Cell cell;
  SubspaceTuple found;
  double recovery_dist = 0.0;
  double energy_found = 0.0;
  double energy_truth = 0.0;
  bool truth_not_better = false;  // energy_truth <= energy_found + 1e-12
  bool success = false;
  double wall_ms = 0.0;
  std::string method;
  std::optional<ConditionReport> condition;
  std::optional<double> f;
};

// The model of one cell: alpha_0 and eps replaced, ratios kept.
HLMModel cell_model(const ExperimentConfig& c, const Cell& cell);

struct GlobalFit {
  OptResult result;
  std::string method;
};

// Energy-best tuple by the configured optimizer. `truth` seeds the
// truth-seeded descent when the optimizer uses it.
GlobalFit global_minimizer(const Matrix& points, const SubspaceTuple& truth, double p,
                           const ExperimentConfig& c, std::uint64_t seed);

TrialResult theorem1_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial);
TrialResult theorem2_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial);
TrialResult theorem3_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial);
TrialResult counterexample_fig1_trial(const ExperimentConfig& c, const Cell& cell,
                                      std::size_t trial);
TrialResult plain_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial);
TrialResult run_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial);

struct CellSummary {
  Cell cell;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  Interval ci95;
  double mean_dist = 0.0;
  double median_dist = 0.0;
  double max_dist = 0.0;
};

struct SweepResult {
  std::vector<TrialResult> rows;  // cell-major, then trial index
  std::vector<CellSummary> cells;
};

std::vector<Cell> sweep_cells(const ExperimentConfig& c);
SweepResult phase_transition_sweep(const ExperimentConfig& c, int workers = 1);
std::vector<CellSummary> summarize(const std::vector<TrialResult>& rows);

std::string results_csv(const std::vector<TrialResult>& rows);
std::string results_jsonl(const std::vector<TrialResult>& rows);
nlohmann::json summary_json(const SweepResult& r);
// Success rate over (p, alpha_0), averaged over the other axes.
std::string svg_heatmap(const SweepResult& r);
// Mean recovery distance against N, one polyline per p.
std::string svg_distance_plot(const SweepResult& r);

// Everything the bound calculators say about the configured model, per p.
nlohmann::json bounds_report(const ExperimentConfig& c);

struct PropertyCheck {
  std::string name;
  std::string module;
  bool passed = false;
  double margin = 0.0;  // >= 0 when passed
  std::string detail;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
  nlohmann::json to_json() const;
};

PropertyReport property_suite(std::uint64_t seed);

}  // namespace hlm
