#include "hlm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "hlm/energy.hpp"

namespace hlm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kEnergySlack = 1e-12;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

template <typename T>
std::vector<T> scalar_or_list(const nlohmann::json& j, const std::string& key) {
  try {
    if (j.is_array()) {
      if (j.empty()) fail(ErrorKind::config, key + ": empty list");
      return j.get<std::vector<T>>();
    }
    return {j.get<T>()};
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, key + ": wrong value type");
  }
}

template <typename T>
T scalar(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, key + ": wrong value type");
  }
}

template <typename T>
nlohmann::json list_json(const std::vector<T>& v) {
  if (v.size() == 1) return v.front();
  return v;
}

ExperimentKind experiment_from(const std::string& s) {
  if (s == "plain") return ExperimentKind::plain;
  if (s == "theorem1") return ExperimentKind::theorem1;
  if (s == "theorem2") return ExperimentKind::theorem2;
  if (s == "theorem3") return ExperimentKind::theorem3;
  if (s == "fig1") return ExperimentKind::fig1;
  fail(ErrorKind::config, "experiment: unknown kind '" + s + "'");
}

OptimizerKind optimizer_from(const std::string& s) {
  if (s == "auto") return OptimizerKind::automatic;
  if (s == "grid-oracle") return OptimizerKind::grid_oracle;
  if (s == "multi-restart") return OptimizerKind::multi_restart;
  if (s == "truth-seeded") return OptimizerKind::truth_seeded;
  fail(ErrorKind::config, "optimizer: unknown kind '" + s + "'");
}

bool grid_capable(int big_d, int d, int k) { return big_d == 2 && d == 1 && k <= 2; }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

bool same_cell(const Cell& a, const Cell& b) {
  return a.p == b.p && a.alpha0 == b.alpha0 && a.eps == b.eps && a.n == b.n;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::plain: return "plain";
    case ExperimentKind::theorem1: return "theorem1";
    case ExperimentKind::theorem2: return "theorem2";
    case ExperimentKind::theorem3: return "theorem3";
    case ExperimentKind::fig1: return "fig1";
  }
  return "plain";
}

const char* to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::automatic: return "auto";
    case OptimizerKind::grid_oracle: return "grid-oracle";
    case OptimizerKind::multi_restart: return "multi-restart";
    case OptimizerKind::truth_seeded: return "truth-seeded";
  }
  return "auto";
}

const std::vector<std::string>& run_keys() {
  static const std::vector<std::string> keys = {
      "experiment",      "p",             "alpha0",          "eps",
      "N",               "trials",        "optimizer",       "restarts",
      "grid_step_deg",   "grid_levels",   "max_iter",        "tol",
      "success_tol_deg", "kappa_threshold", "override_condition", "record_wall_time",
      "mc_budget",       "data",          "seed"};
  return keys;
}

void ExperimentConfig::validate() const {
  if (K < 1 || D < 1 || d < 1 || d > D) fail(ErrorKind::config, "K, D, d: need K >= 1 and 1 <= d <= D");
  if (trials < 1) fail(ErrorKind::config, "trials: must be >= 1");
  for (double p : p_values) {
    if (!(p > 0.0) || !std::isfinite(p)) fail(ErrorKind::config, "p: all values must be > 0");
  }
  for (double a : alpha0_values) {
    if (!(a >= 0.0 && a < 1.0)) fail(ErrorKind::config, "alpha0: values must lie in [0, 1)");
  }
  for (double e : eps_values) {
    if (!(e >= 0.0) || !std::isfinite(e)) fail(ErrorKind::config, "eps: values must be >= 0");
  }
  for (std::size_t n : n_values) {
    if (n < 1) fail(ErrorKind::config, "N: values must be >= 1");
  }
  if (max_iter < 1) fail(ErrorKind::config, "max_iter: must be >= 1");
  if (!(tol >= 0.0)) fail(ErrorKind::config, "tol: must be >= 0");
  if (!(success_tol_deg > 0.0)) fail(ErrorKind::config, "success_tol_deg: must be > 0");
  if (!(kappa_threshold > 0.0)) fail(ErrorKind::config, "kappa_threshold: must be > 0");
  if (mc_budget < kMinMonteCarloBudget) {
    fail(ErrorKind::config, "mc_budget: must be >= " + std::to_string(kMinMonteCarloBudget));
  }
  try {
    grid.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("grid_step_deg/grid_levels: ") + e.what());
  }
}

const HLMModel& ExperimentConfig::require_model() const {
  if (!model) fail(ErrorKind::config, "this command needs a model (truth or scenario keys)");
  return *model;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
  const auto& mkeys = model_keys();
  const auto& rkeys = run_keys();
  nlohmann::json model_part = nlohmann::json::object();
  nlohmann::json run = nlohmann::json::object();
  for (const auto& item : j.items()) {
    if (std::find(mkeys.begin(), mkeys.end(), item.key()) != mkeys.end()) {
      model_part[item.key()] = item.value();
    } else if (std::find(rkeys.begin(), rkeys.end(), item.key()) != rkeys.end()) {
      run[item.key()] = item.value();
    } else {
      fail(ErrorKind::config, "unknown key '" + item.key() + "'");
    }
  }

  ExperimentConfig c;
  const bool has_model = model_part.contains("scenario") || model_part.contains("truth") ||
                         model_part.contains("truth_angles_deg");
  if (has_model) {
    c.model = model_from_json(model_part);
    c.K = c.model->K;
    c.D = c.model->D;
    c.d = c.model->d;
  } else {
    for (const auto& item : model_part.items()) {
      if (item.key() != "K" && item.key() != "D" && item.key() != "d") {
        fail(ErrorKind::config, "key '" + item.key() + "' needs 'truth' or 'scenario'");
      }
    }
    for (const char* key : {"K", "D", "d"}) {
      if (!model_part.contains(key)) fail(ErrorKind::config, std::string("missing key '") + key + "'");
    }
    c.K = scalar<int>(model_part.at("K"), "K");
    c.D = scalar<int>(model_part.at("D"), "D");
    c.d = scalar<int>(model_part.at("d"), "d");
  }

  if (run.contains("experiment")) c.experiment = experiment_from(scalar<std::string>(run["experiment"], "experiment"));
  if (run.contains("p")) c.p_values = scalar_or_list<double>(run["p"], "p");
  if (run.contains("alpha0")) c.alpha0_values = scalar_or_list<double>(run["alpha0"], "alpha0");
  if (run.contains("eps")) c.eps_values = scalar_or_list<double>(run["eps"], "eps");
  if (run.contains("N")) {
    const auto ns = scalar_or_list<double>(run["N"], "N");
    c.n_values.clear();
    for (double n : ns) {
      if (!(n >= 1.0) || n != std::floor(n)) fail(ErrorKind::config, "N: values must be positive integers");
      c.n_values.push_back(static_cast<std::size_t>(n));
    }
  }
  if (run.contains("trials")) {
    const auto t = scalar<long long>(run["trials"], "trials");
    if (t < 1) fail(ErrorKind::config, "trials: must be >= 1");
    c.trials = static_cast<std::size_t>(t);
  }
  if (run.contains("optimizer")) c.optimizer = optimizer_from(scalar<std::string>(run["optimizer"], "optimizer"));
  if (run.contains("restarts")) c.restarts = scalar<std::size_t>(run["restarts"], "restarts");
  if (run.contains("grid_step_deg")) c.grid.step = scalar<double>(run["grid_step_deg"], "grid_step_deg") * kDeg;
  if (run.contains("grid_levels")) c.grid.levels = scalar<int>(run["grid_levels"], "grid_levels");
  if (run.contains("max_iter")) c.max_iter = scalar<int>(run["max_iter"], "max_iter");
  if (run.contains("tol")) c.tol = scalar<double>(run["tol"], "tol");
  if (run.contains("success_tol_deg")) c.success_tol_deg = scalar<double>(run["success_tol_deg"], "success_tol_deg");
  if (run.contains("kappa_threshold")) c.kappa_threshold = scalar<double>(run["kappa_threshold"], "kappa_threshold");
  if (run.contains("override_condition")) c.override_condition = scalar<bool>(run["override_condition"], "override_condition");
  if (run.contains("record_wall_time")) c.record_wall_time = scalar<bool>(run["record_wall_time"], "record_wall_time");
  if (run.contains("mc_budget")) c.mc_budget = scalar<std::size_t>(run["mc_budget"], "mc_budget");
  if (run.contains("data")) c.data = scalar<std::string>(run["data"], "data");
  if (run.contains("seed")) c.seed = scalar<std::uint64_t>(run["seed"], "seed");
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j = c.model ? model_to_json(*c.model) : nlohmann::json::object();
  if (!c.model) {
    j["K"] = c.K;
    j["D"] = c.D;
    j["d"] = c.d;
  }
  j["experiment"] = to_string(c.experiment);
  j["p"] = list_json(c.p_values);
  if (!c.alpha0_values.empty()) j["alpha0"] = list_json(c.alpha0_values);
  if (!c.eps_values.empty()) j["eps"] = list_json(c.eps_values);
  j["N"] = list_json(c.n_values);
  j["trials"] = c.trials;
  j["optimizer"] = to_string(c.optimizer);
  j["restarts"] = c.restarts;
  j["grid_step_deg"] = c.grid.step / kDeg;
  j["grid_levels"] = c.grid.levels;
  j["max_iter"] = c.max_iter;
  j["tol"] = c.tol;
  j["success_tol_deg"] = c.success_tol_deg;
  j["kappa_threshold"] = c.kappa_threshold;
  j["override_condition"] = c.override_condition;
  j["record_wall_time"] = c.record_wall_time;
  j["mc_budget"] = c.mc_budget;
  if (c.data) j["data"] = *c.data;
  j["seed"] = c.seed;
  return j;
}

std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a64(config_to_json(c).dump()); }

HLMModel cell_model(const ExperimentConfig& c, const Cell& cell) {
  HLMModel m = c.require_model().with_outlier_weight(cell.alpha0);
  if (cell.eps != m.noise_level()) m = m.with_noise_level(cell.eps);
  return m;
}

GlobalFit global_minimizer(const Matrix& points, const SubspaceTuple& truth, double p,
                           const ExperimentConfig& c, std::uint64_t seed) {
  KFlatsOptions opts;
  opts.max_iter = c.max_iter;
  opts.tol = c.tol;
  opts.seed = seed;
  const std::size_t k = truth.size();
  const int d = truth.dim();
  GlobalFit out;
  switch (c.optimizer) {
    case OptimizerKind::grid_oracle:
      out.result = grid_search_global(points, k, p, c.grid);
      out.method = "grid-oracle";
      break;
    case OptimizerKind::multi_restart:
      out.result = multi_restart(points, k, d, p, c.restarts, seed, {}, opts);
      out.method = "multi-restart";
      break;
    case OptimizerKind::truth_seeded:
      out.result = lp_kflats(points, k, d, p, truth, opts);
      out.method = "truth-seeded";
      break;
    case OptimizerKind::automatic:
      if (grid_capable(truth.ambient_dim(), d, static_cast<int>(k))) {
        out.result = grid_search_global(points, k, p, c.grid);
        out.method = "grid-oracle";
      } else {
        const std::vector<SubspaceTuple> seeded{truth};
        out.result = multi_restart(points, k, d, p, c.restarts, seed, seeded, opts);
        out.method = "multi-restart+truth-seeded";
      }
      break;
  }
  return out;
}

namespace {

TrialResult measure(const ExperimentConfig& c, const HLMModel& m, const Cell& cell,
                    std::size_t trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult r;
  r.trial = trial;
  r.seed = derive_seed(c.seed, trial);
  r.cell = cell;
  const Dataset data = sample(m, cell.n, r.seed);
  const GlobalFit fit = global_minimizer(data.points, m.truth, cell.p, c, derive_seed(r.seed, 1));
  r.found = fit.result.tuple;
  r.method = fit.method;
  r.energy_found = energy_sum(data.points, r.found, cell.p);
  r.energy_truth = energy_sum(data.points, m.truth, cell.p);
  r.truth_not_better = r.energy_truth <= r.energy_found + kEnergySlack;
  r.recovery_dist = recovery_distance(r.found, m.truth).distance;
  if (c.record_wall_time) {
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return r;
}

}  // namespace

TrialResult theorem1_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial) {
  const HLMModel m = cell_model(c, cell);
  if (m.noise_level() != 0.0) fail(ErrorKind::domain, "theorem1 needs eps = 0");
  if (!(cell.p > 0.0 && cell.p <= 1.0)) fail(ErrorKind::domain, "theorem1 needs p in (0, 1]");
  const ConditionReport cond = check_exact_recovery_condition(m, cell.p);
  if (!cond.holds && !c.override_condition) {
    fail(ErrorKind::condition, "exact-recovery condition violated: alpha0 = " + num(cond.lhs) +
                                   " is not below " + num(cond.rhs) + " (set override_condition)");
  }
  TrialResult r = measure(c, m, cell, trial);
  r.condition = cond;
  r.success = r.recovery_dist < c.success_tol_deg * kDeg;
  return r;
}

TrialResult theorem2_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial) {
  const HLMModel m = cell_model(c, cell);
  if (!(cell.p > 0.0 && cell.p <= 1.0)) fail(ErrorKind::domain, "theorem2 needs p in (0, 1]");
  const NoiseBounds b = noise_recovery_bounds(m, cell.p);
  if (!b.eps_max || !b.eps_ceiling || !b.f) {
    fail(ErrorKind::domain, "theorem2: noise bounds unavailable for this model (negative radicand)");
  }
  const double band = std::min(*b.eps_max, *b.eps_ceiling);
  if (!(b.eps > 0.0 && b.eps < band)) {
    fail(ErrorKind::domain, "theorem2: eps = " + num(b.eps) + " outside the admissible band (0, " +
                                num(band) + ")");
  }
  TrialResult r = measure(c, m, cell, trial);
  r.f = b.f;
  r.success = r.recovery_dist < *b.f;
  return r;
}

TrialResult theorem3_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial) {
  const HLMModel m = cell_model(c, cell);
  if (!(cell.p > 1.0)) fail(ErrorKind::domain, "theorem3 needs p > 1");
  if (m.K < 2) fail(ErrorKind::domain, "theorem3 needs K > 1");
  if (m.outlier.kind != OutlierKind::uniform_ball || !(m.alphas[0] > 0.0)) {
    fail(ErrorKind::domain, "theorem3 needs uniform-ball outliers with alpha0 > 0");
  }
  TrialResult r = measure(c, m, cell, trial);
  r.success = r.recovery_dist >= c.kappa_threshold;
  return r;
}

TrialResult counterexample_fig1_trial(const ExperimentConfig& c, const Cell& cell,
                                      std::size_t trial) {
  const HLMModel m = cell_model(c, cell);
  TrialResult r = measure(c, m, cell, trial);
  const double floor = r.method == "grid-oracle" ? c.grid.final_resolution() : 0.0;
  r.success = r.recovery_dist > floor;
  return r;
}

TrialResult plain_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial) {
  const HLMModel m = cell_model(c, cell);
  TrialResult r = measure(c, m, cell, trial);
  r.success = r.recovery_dist < c.success_tol_deg * kDeg;
  return r;
}

TrialResult run_trial(const ExperimentConfig& c, const Cell& cell, std::size_t trial) {
  switch (c.experiment) {
    case ExperimentKind::theorem1: return theorem1_trial(c, cell, trial);
    case ExperimentKind::theorem2: return theorem2_trial(c, cell, trial);
    case ExperimentKind::theorem3: return theorem3_trial(c, cell, trial);
    case ExperimentKind::fig1: return counterexample_fig1_trial(c, cell, trial);
    case ExperimentKind::plain: break;
  }
  return plain_trial(c, cell, trial);
}

std::vector<Cell> sweep_cells(const ExperimentConfig& c) {
  const HLMModel& m = c.require_model();
  const std::vector<double> alphas = c.alpha0_values.empty() ? std::vector<double>{m.alphas[0]} : c.alpha0_values;
  const std::vector<double> epss = c.eps_values.empty() ? std::vector<double>{m.noise_level()} : c.eps_values;
  std::vector<Cell> cells;
  for (double p : c.p_values) {
    for (double a : alphas) {
      for (double e : epss) {
        for (std::size_t n : c.n_values) cells.push_back(Cell{p, a, e, n});
      }
    }
  }
  return cells;
}

SweepResult phase_transition_sweep(const ExperimentConfig& c, int workers) {
  const std::vector<Cell> cells = sweep_cells(c);
  SweepResult out;
  out.rows.resize(cells.size() * c.trials);
  parallel_for(out.rows.size(), workers, [&](std::size_t job) {
    out.rows[job] = run_trial(c, cells[job / c.trials], job % c.trials);
  });
  out.cells = summarize(out.rows);
  return out;
}

std::vector<CellSummary> summarize(const std::vector<TrialResult>& rows) {
  std::vector<CellSummary> out;
  std::vector<std::vector<double>> dists;
  for (const auto& r : rows) {
    std::size_t idx = out.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (same_cell(out[i].cell, r.cell)) {
        idx = i;
        break;
      }
    }
    if (idx == out.size()) {
      out.push_back(CellSummary{});
      out.back().cell = r.cell;
      dists.emplace_back();
    }
    CellSummary& s = out[idx];
    ++s.trials;
    s.successes += r.success ? 1 : 0;
    dists[idx].push_back(r.recovery_dist);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    CellSummary& s = out[i];
    s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.trials);
    s.ci95 = wilson_interval(s.successes, s.trials, 1.959963984540054);
    double sum = 0.0;
    for (double v : dists[i]) sum += v;
    s.mean_dist = sum / static_cast<double>(dists[i].size());
    s.median_dist = median(dists[i]);
    s.max_dist = *std::max_element(dists[i].begin(), dists[i].end());
  }
  return out;
}

std::string results_csv(const std::vector<TrialResult>& rows) {
  std::string out =
      "trial,seed,p,alpha0,eps,N,recovery_dist,energy_found,energy_truth,success,wall_ms,method\n";
  for (const auto& r : rows) {
    out += std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' + num(r.cell.p) + ',' +
           num(r.cell.alpha0) + ',' + num(r.cell.eps) + ',' + std::to_string(r.cell.n) + ',' +
           num(r.recovery_dist) + ',' + num(r.energy_found) + ',' + num(r.energy_truth) + ',' +
           (r.success ? "1" : "0") + ',' + num(r.wall_ms) + ',' + r.method + '\n';
  }
  return out;
}

std::string results_jsonl(const std::vector<TrialResult>& rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::json j;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["p"] = r.cell.p;
    j["alpha0"] = r.cell.alpha0;
    j["eps"] = r.cell.eps;
    j["N"] = r.cell.n;
    j["recovery_dist"] = r.recovery_dist;
    j["energy_found"] = r.energy_found;
    j["energy_truth"] = r.energy_truth;
    j["truth_not_better"] = r.truth_not_better;
    j["success"] = r.success;
    j["wall_ms"] = r.wall_ms;
    j["method"] = r.method;
    j["found"] = to_json(r.found);
    if (r.condition) {
      j["condition"] = {{"holds", r.condition->holds}, {"lhs", r.condition->lhs},
                        {"rhs", r.condition->rhs}, {"tau0", r.condition->tau0}};
    }
    if (r.f) j["f"] = *r.f;
    out += j.dump() + '\n';
  }
  return out;
}

nlohmann::json summary_json(const SweepResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& s : r.cells) {
    cells.push_back({{"p", s.cell.p},
                     {"alpha0", s.cell.alpha0},
                     {"eps", s.cell.eps},
                     {"N", s.cell.n},
                     {"trials", s.trials},
                     {"successes", s.successes},
                     {"success_rate", s.success_rate},
                     {"ci95", {s.ci95.lo, s.ci95.hi}},
                     {"mean_dist", s.mean_dist},
                     {"median_dist", s.median_dist},
                     {"max_dist", s.max_dist}});
  }
  return {{"rows", r.rows.size()}, {"cells", cells}};
}

std::string svg_heatmap(const SweepResult& r) {
  std::set<double> ps;
  std::set<double> as;
  std::map<std::pair<double, double>, std::pair<std::size_t, std::size_t>> tally;
  for (const auto& s : r.cells) {
    ps.insert(s.cell.p);
    as.insert(s.cell.alpha0);
    auto& t = tally[{s.cell.p, s.cell.alpha0}];
    t.first += s.successes;
    t.second += s.trials;
  }
  const int cw = 70;
  const int ch = 40;
  const int left = 70;
  const int top = 30;
  const int width = left + cw * static_cast<int>(as.size()) + 20;
  const int height = top + ch * static_cast<int>(ps.size()) + 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<text x=\"" << left << "\" y=\"18\">success rate by p (rows) and alpha0 (columns)</text>\n";
  int row = 0;
  for (double p : ps) {
    const int y = top + ch * row;
    svg << "<text x=\"8\" y=\"" << y + ch / 2 + 4 << "\">p=" << short_num(p) << "</text>\n";
    int col = 0;
    for (double a : as) {
      const int x = left + cw * col;
      auto it = tally.find({p, a});
      if (it != tally.end() && it->second.second > 0) {
        const double rate = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
        const int red = static_cast<int>(std::lround(255 * (1.0 - rate)));
        const int green = static_cast<int>(std::lround(200 * rate));
        svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch
            << "\" fill=\"rgb(" << red << ',' << green << ",80)\" stroke=\"white\"/>\n";
        svg << "<text x=\"" << x + 8 << "\" y=\"" << y + ch / 2 + 4 << "\" fill=\"white\">"
            << short_num(rate) << "</text>\n";
      }
      ++col;
    }
    ++row;
  }
  int col = 0;
  for (double a : as) {
    svg << "<text x=\"" << left + cw * col + 8 << "\" y=\"" << top + ch * row + 18 << "\">"
        << short_num(a) << "</text>\n";
    ++col;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_distance_plot(const SweepResult& r) {
  std::map<double, std::map<std::size_t, std::pair<double, std::size_t>>> series;
  double ymax = 0.0;
  std::size_t nmin = 0;
  std::size_t nmax = 0;
  for (const auto& s : r.cells) {
    auto& point = series[s.cell.p][s.cell.n];
    point.first += s.mean_dist * static_cast<double>(s.trials);
    point.second += s.trials;
    nmin = nmin == 0 ? s.cell.n : std::min(nmin, s.cell.n);
    nmax = std::max(nmax, s.cell.n);
  }
  for (const auto& [p, pts] : series) {
    for (const auto& [n, acc] : pts) ymax = std::max(ymax, acc.first / static_cast<double>(acc.second));
  }
  if (ymax <= 0.0) ymax = 1.0;
  const double lx0 = std::log10(static_cast<double>(std::max<std::size_t>(nmin, 1)));
  const double lx1 = std::max(lx0 + 1.0, std::log10(static_cast<double>(std::max<std::size_t>(nmax, 1))));
  const int w = 480;
  const int h = 300;
  const int left = 60;
  const int top = 30;
  auto px = [&](std::size_t n) { return left + (std::log10(static_cast<double>(n)) - lx0) / (lx1 - lx0) * w; };
  auto py = [&](double v) { return top + h - v / ymax * h; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + w + 120 << "\" height=\""
      << top + h + 50 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<text x=\"" << left << "\" y=\"18\">mean recovery distance (rad) against N</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + h << "\" x2=\"" << left + w << "\" y2=\"" << top + h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + h
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"4\" y=\"" << top + 4 << "\">" << short_num(ymax) << "</text>\n";
  svg << "<text x=\"" << left << "\" y=\"" << top + h + 18 << "\">N=" << nmin << "</text>\n";
  svg << "<text x=\"" << left + w - 60 << "\" y=\"" << top + h + 18 << "\">N=" << nmax << "</text>\n";
  std::size_t idx = 0;
  for (const auto& [p, pts] : series) {
    const char* color = colors[idx % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [n, acc] : pts) {
      svg << short_num(px(n)) << ',' << short_num(py(acc.first / static_cast<double>(acc.second))) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << left + w + 10 << "\" y=\"" << top + 14 + 16 * static_cast<int>(idx) << "\" fill=\""
        << color << "\">p=" << short_num(p) << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

nlohmann::json bounds_report(const ExperimentConfig& c) {
  const HLMModel& m = c.require_model();
  nlohmann::json out;
  out["K"] = m.K;
  out["D"] = m.D;
  out["d"] = m.d;
  out["alpha0"] = m.alphas[0];
  out["min_inlier_weight"] = m.min_inlier_weight();
  out["min_pairwise_distance"] = m.K > 1 ? nlohmann::json(m.min_pairwise_distance()) : nlohmann::json();
  out["eps"] = m.noise_level();
  nlohmann::json per_p = nlohmann::json::array();
  Rng rng(c.seed);
  for (double p : c.p_values) {
    nlohmann::json e;
    e["p"] = p;
    if (p <= 1.0) {
      try {
        const double t = tau0(m, p);
        e["tau0"] = t;
        const InlierSpec& in = m.inliers.front();
        if (in.kind == InlierKind::uniform_ball && in.atom == 0.0) {
          // Outlier supports are all inside the unit ball.
          const double lb = tau0_lower_bound_uniform(m.d, p, m.K, in.radius, 1.0);
          e["tau0_lower_bound"] = lb;
          e["lower_bound_exceeds_tau0"] = lb > t;
        }
      } catch (const Error& err) {
        e["tau0"] = nullptr;
        e["tau0_unavailable"] = err.what();
      }
      if (e["tau0"].is_number()) {
        if (m.noise_level() == 0.0) {
          const ConditionReport cond = check_exact_recovery_condition(m, p);
          e["condition"] = {{"holds", cond.holds}, {"lhs", cond.lhs}, {"rhs", cond.rhs}};
        }
        const NoiseBounds b = noise_recovery_bounds(m, p);
        auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
        e["noise"] = {{"eps", b.eps},
                      {"eps_max", opt(b.eps_max)},
                      {"f", opt(b.f)},
                      {"eps_ceiling", opt(b.eps_ceiling)},
                      {"available", b.eps_max.has_value() && b.f.has_value()}};
      }
    } else if (m.K > 1) {
      const DeltaKappaBounds dk = delta_kappa_lower_bounds(m, p, c.grid, c.mc_budget, rng);
      e["delta_kappa"] = {{"bound_general", dk.bound_general},
                          {"bound_general_stderr", dk.bound_general_stderr},
                          {"bound_p_ge_2", dk.bound_p_ge_2 ? nlohmann::json(*dk.bound_p_ge_2) : nlohmann::json()},
                          {"samples", dk.samples}};
    }
    per_p.push_back(e);
  }
  out["per_p"] = per_p;
  return out;
}

}  // namespace hlm
