#include "hlm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "hlm/energy.hpp"

namespace hlm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Marginal P(|<x, v>| < s * r) of the normalized law in d dimensions.
double slab_fraction(InlierKind kind, int d, double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double x = s * s;
  if (kind == InlierKind::uniform_ball) {
    return boost::math::ibeta(0.5, 0.5 * (d + 1), x);
  }
  if (d == 1) return 0.0;  // the 0-sphere sits at +-r
  return boost::math::ibeta(0.5, 0.5 * (d - 1), x);
}

const char* name_of(InlierKind k) {
  return k == InlierKind::uniform_ball ? "uniform-ball" : "uniform-sphere";
}

const char* name_of(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::uniform_slab: return "uniform-slab";
    case NoiseKind::uniform_orthogonal_ball: return "uniform-orthogonal-ball";
    case NoiseKind::split_slab: return "split-slab";
  }
  return "none";
}

const char* name_of(OutlierKind k) {
  switch (k) {
    case OutlierKind::uniform_ball: return "uniform-ball-D";
    case OutlierKind::on_subspace: return "on-subspace";
    case OutlierKind::large_magnitude_shell: return "large-magnitude-shell";
  }
  return "uniform-ball-D";
}

InlierKind inlier_kind_from(const std::string& s) {
  if (s == "uniform-ball") return InlierKind::uniform_ball;
  if (s == "uniform-sphere") return InlierKind::uniform_sphere;
  fail(ErrorKind::config, "inlier_kind: unknown kind '" + s + "'");
}

NoiseKind noise_kind_from(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "uniform-slab") return NoiseKind::uniform_slab;
  if (s == "uniform-orthogonal-ball") return NoiseKind::uniform_orthogonal_ball;
  if (s == "split-slab") return NoiseKind::split_slab;
  fail(ErrorKind::config, "noise_kind: unknown kind '" + s + "'");
}

OutlierKind outlier_kind_from(const std::string& s) {
  if (s == "uniform-ball-D") return OutlierKind::uniform_ball;
  if (s == "on-subspace") return OutlierKind::on_subspace;
  if (s == "large-magnitude-shell") return OutlierKind::large_magnitude_shell;
  fail(ErrorKind::config, "outlier_kind: unknown kind '" + s + "'");
}

Matrix basis_from_entries(const std::vector<double>& entries, int big_d, int d,
                          const std::string& key) {
  if (entries.size() != static_cast<std::size_t>(big_d) * static_cast<std::size_t>(d)) {
    fail(ErrorKind::config, key + ": expected " + std::to_string(big_d * d) +
                                " column-major entries, got " + std::to_string(entries.size()));
  }
  Matrix b(big_d, d);
  std::size_t k = 0;
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < big_d; ++r) b(r, c) = entries[k++];
  }
  return b;
}

std::vector<double> entries_of(const Subspace& s) {
  std::vector<double> out;
  for (Eigen::Index c = 0; c < s.basis().cols(); ++c) {
    for (Eigen::Index r = 0; r < s.basis().rows(); ++r) out.push_back(s.basis()(r, c));
  }
  return out;
}

// Either a scalar applied to all K components or an array of K values.
template <typename T>
std::vector<T> per_component(const nlohmann::json& j, const std::string& key, std::size_t k) {
  try {
    if (j.is_array()) {
      if (j.size() != k) {
        fail(ErrorKind::config, key + ": expected " + std::to_string(k) + " values");
      }
      return j.get<std::vector<T>>();
    }
    return std::vector<T>(k, j.get<T>());
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, key + ": wrong value type");
  }
}

template <typename T, typename F>
nlohmann::json compact(const std::vector<T>& items, F field) {
  bool same = true;
  for (const auto& it : items) same = same && field(it) == field(items.front());
  if (same) return field(items.front());
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& it : items) arr.push_back(field(it));
  return arr;
}

double param(const nlohmann::json& params, const std::string& key, double fallback) {
  if (!params.contains(key)) return fallback;
  try {
    return params.at(key).get<double>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, "scenario parameter '" + key + "' must be a number");
  }
}

void reject_unknown(const nlohmann::json& params, const std::set<std::string>& allowed,
                    const std::string& what) {
  if (params.is_null()) return;
  if (!params.is_object()) fail(ErrorKind::config, what + ": parameters must be an object");
  for (const auto& item : params.items()) {
    if (!allowed.count(item.key())) {
      fail(ErrorKind::config, what + ": unknown parameter '" + item.key() + "'");
    }
  }
}

double rotation_param(const nlohmann::json& params, Rng& rng) {
  if (!params.contains("rotation_deg")) return 0.0;
  const auto& r = params.at("rotation_deg");
  if (r.is_string() && r.get<std::string>() == "random") return uniform01(rng) * std::numbers::pi;
  if (!r.is_number()) fail(ErrorKind::config, "rotation_deg must be a number or \"random\"");
  return r.get<double>() * kDeg;
}

HLMModel two_lines(double first, double second, std::vector<double> alphas) {
  HLMModel m;
  m.K = 2;
  m.D = 2;
  m.d = 1;
  m.truth = SubspaceTuple({Subspace::line(first), Subspace::line(second)});
  m.alphas = std::move(alphas);
  m.inliers.assign(2, InlierSpec{});
  m.noises.assign(2, NoiseSpec{});
  return m;
}

}  // namespace

void InlierSpec::validate() const {
  if (!(radius > 0.0 && radius <= 1.0)) fail(ErrorKind::config, "inlier_radius must lie in (0, 1]");
  if (!(atom >= 0.0 && atom < 1.0)) fail(ErrorKind::config, "inlier_atom must lie in [0, 1)");
}

void NoiseSpec::validate() const {
  if (!(level >= 0.0) || !std::isfinite(level)) fail(ErrorKind::config, "noise_level must be >= 0");
  if (!(split >= 0.0 && split <= 1.0)) fail(ErrorKind::config, "noise_split must lie in [0, 1]");
  if (!(gap >= 0.0 && gap < 1.0)) fail(ErrorKind::config, "noise_gap must lie in [0, 1)");
}

void OutlierSpec::validate(int ambient_dim) const {
  if (kind == OutlierKind::large_magnitude_shell && !(inner_radius >= 0.0 && inner_radius < 1.0)) {
    fail(ErrorKind::config, "outlier_inner_radius must lie in [0, 1)");
  }
  if (kind == OutlierKind::on_subspace) {
    if (!subspace) fail(ErrorKind::config, "outlier_subspace is required for on-subspace outliers");
    if (subspace->ambient_dim() != ambient_dim) {
      fail(ErrorKind::config, "outlier_subspace has the wrong ambient dimension");
    }
  }
}

bool operator==(const OutlierSpec& a, const OutlierSpec& b) {
  if (a.kind != b.kind || a.inner_radius != b.inner_radius) return false;
  if (a.subspace.has_value() != b.subspace.has_value()) return false;
  return !a.subspace || a.subspace->basis() == b.subspace->basis();
}

void HLMModel::validate() const {
  if (K < 1) fail(ErrorKind::config, "K must be >= 1");
  if (D < 1 || d < 1 || d > D) fail(ErrorKind::config, "need 1 <= d <= D");
  if (truth.size() != static_cast<std::size_t>(K) || truth.ambient_dim() != D || truth.dim() != d) {
    fail(ErrorKind::config, "truth must hold K subspaces of dimension d in R^D");
  }
  if (alphas.size() != static_cast<std::size_t>(K) + 1) {
    fail(ErrorKind::config, "alphas must have K + 1 entries (outliers first)");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] >= 0.0)) fail(ErrorKind::config, "alphas must be nonnegative");
    if (i > 0 && !(alphas[i] > 0.0)) {
      fail(ErrorKind::config, "alphas: inlier weight alpha_" + std::to_string(i) + " must be > 0");
    }
    total += alphas[i];
  }
  if (std::abs(total - 1.0) > 1e-12) fail(ErrorKind::config, "alphas must sum to 1");
  if (min_pairwise_distance() <= 1e-6) fail(ErrorKind::config, "truth subspaces must be distinct");
  if (inliers.size() != static_cast<std::size_t>(K) || noises.size() != static_cast<std::size_t>(K)) {
    fail(ErrorKind::config, "need one inlier and one noise spec per component");
  }
  for (const auto& s : inliers) s.validate();
  for (const auto& s : noises) {
    s.validate();
    if (s.kind == NoiseKind::split_slab && D - d != 1) {
      fail(ErrorKind::config, "split-slab noise needs codimension 1");
    }
  }
  outlier.validate(D);
}

double HLMModel::noise_level() const {
  double eps = 0.0;
  for (const auto& s : noises) eps = std::max(eps, s.support_radius());
  return eps;
}

double HLMModel::min_inlier_weight() const {
  return *std::min_element(alphas.begin() + 1, alphas.end());
}

double HLMModel::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = i + 1; j < truth.size(); ++j) {
      best = std::min(best, dist_grassmann(truth[i], truth[j]));
    }
  }
  return best;
}

bool HLMModel::weakly_symmetric() const {
  return std::all_of(inliers.begin(), inliers.end(),
                     [&](const InlierSpec& s) { return s == inliers.front(); });
}

HLMModel HLMModel::with_outlier_weight(double alpha0) const {
  if (!(alpha0 >= 0.0 && alpha0 < 1.0)) fail(ErrorKind::config, "alpha0 must lie in [0, 1)");
  HLMModel m = *this;
  double inlier_total = 0.0;
  for (std::size_t i = 1; i < alphas.size(); ++i) inlier_total += alphas[i];
  m.alphas[0] = alpha0;
  for (std::size_t i = 1; i < alphas.size(); ++i) m.alphas[i] = (1.0 - alpha0) * alphas[i] / inlier_total;
  return m;
}

HLMModel HLMModel::with_noise_level(double eps) const {
  HLMModel m = *this;
  for (auto& s : m.noises) {
    s.level = eps;
    if (eps > 0.0 && s.kind == NoiseKind::none) s.kind = NoiseKind::uniform_slab;
  }
  return m;
}

bool operator==(const HLMModel& a, const HLMModel& b) {
  if (a.K != b.K || a.D != b.D || a.d != b.d || a.alphas != b.alphas || a.inliers != b.inliers ||
      a.noises != b.noises || !(a.outlier == b.outlier) || a.truth.size() != b.truth.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    if (a.truth[i].basis() != b.truth[i].basis()) return false;
  }
  return true;
}

Matrix sample_inliers(const HLMModel& model, std::size_t component, std::size_t n, Rng& rng) {
  if (component < 1 || component > static_cast<std::size_t>(model.K)) {
    fail(ErrorKind::shape, "component index out of range");
  }
  const InlierSpec& spec = model.inliers[component - 1];
  const Matrix& b = model.truth[component - 1].basis();
  Matrix out(static_cast<Eigen::Index>(n), model.D);
  for (std::size_t i = 0; i < n; ++i) {
    Vector coords = Vector::Zero(model.d);
    if (!(spec.atom > 0.0 && uniform01(rng) < spec.atom)) {
      coords = spec.kind == InlierKind::uniform_ball ? uniform_ball_point(model.d, rng)
                                                     : uniform_sphere_point(model.d, rng);
      coords *= spec.radius;
    }
    out.row(static_cast<Eigen::Index>(i)) = (b * coords).transpose();
  }
  return out;
}

Dataset sample(const HLMModel& model, std::size_t n, Rng& rng, std::uint64_t seed_tag) {
  model.validate();
  if (n < 1) fail(ErrorKind::domain, "sample size must be >= 1");
  std::vector<Matrix> complements;
  for (const auto& l : model.truth) {
    complements.push_back(model.D > model.d ? orthogonal_complement(l) : Matrix(model.D, 0));
  }
  std::vector<double> cumulative(model.alphas.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < model.alphas.size(); ++i) cumulative[i] = (acc += model.alphas[i]);

  Dataset out;
  out.seed = seed_tag;
  out.points.resize(static_cast<Eigen::Index>(n), model.D);
  out.labels.resize(n);
  for (std::size_t row = 0; row < n; ++row) {
    const double u = uniform01(rng);
    std::size_t comp = model.alphas.size() - 1;
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (u < cumulative[i]) {
        comp = i;
        break;
      }
    }
    while (comp > 0 && model.alphas[comp] == 0.0) --comp;
    Vector x(model.D);
    if (comp == 0) {
      switch (model.outlier.kind) {
        case OutlierKind::uniform_ball:
          x = uniform_ball_point(model.D, rng);
          break;
        case OutlierKind::on_subspace: {
          const Subspace& l0 = *model.outlier.subspace;
          x = l0.basis() * uniform_ball_point(l0.dim(), rng);
          break;
        }
        case OutlierKind::large_magnitude_shell: {
          const double inner = std::pow(model.outlier.inner_radius, model.D);
          const double r = std::pow(inner + uniform01(rng) * (1.0 - inner), 1.0 / model.D);
          x = uniform_sphere_point(model.D, rng) * r;
          break;
        }
      }
    } else {
      const InlierSpec& spec = model.inliers[comp - 1];
      const NoiseSpec& noise = model.noises[comp - 1];
      Vector coords = Vector::Zero(model.d);
      if (!(spec.atom > 0.0 && uniform01(rng) < spec.atom)) {
        coords = spec.kind == InlierKind::uniform_ball ? uniform_ball_point(model.d, rng)
                                                       : uniform_sphere_point(model.d, rng);
        coords *= spec.radius;
      }
      x = model.truth[comp - 1].basis() * coords;
      const Matrix& perp = complements[comp - 1];
      const int codim = static_cast<int>(perp.cols());
      if (codim > 0 && noise.support_radius() > 0.0) {
        const double eps = noise.level;
        switch (noise.kind) {
          case NoiseKind::none:
            break;
          case NoiseKind::uniform_slab:
            x += perp * (uniform_sphere_point(codim, rng) * (eps * uniform01(rng)));
            break;
          case NoiseKind::uniform_orthogonal_ball:
            x += perp * (uniform_ball_point(codim, rng) * eps);
            break;
          case NoiseKind::split_slab: {
            const double side = uniform01(rng) < noise.split ? 1.0 : -1.0;
            const double mag = eps * (noise.gap + (1.0 - noise.gap) * uniform01(rng));
            x += perp.col(0) * (side * mag);
            break;
          }
        }
      }
    }
    out.points.row(static_cast<Eigen::Index>(row)) = x.transpose();
    out.labels[row] = static_cast<int>(comp);
  }
  return out;
}

Dataset sample(const HLMModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample(model, n, rng, seed);
}

double psi(const InlierSpec& spec, int d, double t) {
  spec.validate();
  if (d < 1) fail(ErrorKind::domain, "psi needs d >= 1");
  if (!(t >= 0.0)) fail(ErrorKind::domain, "psi needs t >= 0");
  if (t == 0.0) return 0.0;
  if (t >= spec.radius) return 1.0;
  return spec.atom + (1.0 - spec.atom) * slab_fraction(spec.kind, d, t / spec.radius);
}

double psi_inverse(const InlierSpec& spec, int d, double q) {
  spec.validate();
  if (!(q > spec.atom && q <= 1.0)) {
    fail(ErrorKind::domain, "psi_inverse needs q in (atom mass, 1]");
  }
  if (q == 1.0) return spec.radius;
  double lo = 0.0;
  double hi = spec.radius;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = psi(spec, d, mid);
    if (std::abs(v - q) <= 1e-15) return mid;
    if (v < q) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

double tau0(const HLMModel& model, double p) {
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::domain, "tau0 is defined for p in (0, 1]");
  if (!model.weakly_symmetric()) {
    fail(ErrorKind::domain, "tau0 needs a weakly spherically symmetric model");
  }
  const InlierSpec& spec = model.inliers.front();
  const double atom = spec.atom;
  const double k = static_cast<double>(model.K);
  const double q = (1.0 + (2.0 * k - 1.0) * atom) / (2.0 * k);
  const double inv = psi_inverse(spec, model.d, q);
  return (1.0 - atom) * std::pow(2.0, p - 1.0) * std::pow(inv, p) /
         std::pow(std::numbers::pi * std::sqrt(static_cast<double>(model.d)), p);
}

double tau0_lower_bound_uniform(int d, double p, int k, double r1, double r2) {
  if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::domain, "p must lie in (0, 1]");
  if (!(r1 > 0.0 && r2 > 0.0) || d < 1 || k < 1) fail(ErrorKind::domain, "radii, d and K must be positive");
  return std::pow(r1, p) / (std::pow(2.0, p + 1.0) * std::pow(static_cast<double>(k), p) *
                            std::pow(static_cast<double>(d), 1.5 * p) * std::pow(r2, p));
}

namespace {

double separation_factor(const HLMModel& model, double p) {
  if (model.K < 2) return 1.0;
  return std::min(1.0, std::pow(model.min_pairwise_distance(), p) / std::pow(2.0, p));
}

}  // namespace

ConditionReport check_exact_recovery_condition(const HLMModel& model, double p) {
  model.validate();
  if (model.noise_level() > 0.0) {
    fail(ErrorKind::domain, "model is noisy; use noise_recovery_bounds instead");
  }
  ConditionReport out;
  out.tau0 = tau0(model, p);
  out.lhs = model.alphas[0];
  out.rhs = out.tau0 * model.min_inlier_weight() * separation_factor(model, p);
  out.holds = out.lhs < out.rhs;
  return out;
}

NoiseBounds noise_recovery_bounds(const HLMModel& model, double p) {
  model.validate();
  NoiseBounds out;
  out.tau0 = tau0(model, p);
  out.eps = model.noise_level();
  const double alpha0 = model.alphas[0];
  const double weighted = out.tau0 * model.min_inlier_weight();
  const double radicand_max = weighted * separation_factor(model, p) - alpha0;
  if (radicand_max > 0.0) out.eps_max = std::pow(3.0, -1.0 / p) * std::pow(radicand_max, 1.0 / p);
  const double margin = weighted - alpha0;
  if (margin > 0.0) {
    out.f = std::pow(3.0, 1.0 / p) * std::pow(margin, -1.0 / p) * out.eps;
    out.eps_ceiling = std::numbers::pi * std::sqrt(static_cast<double>(model.d)) *
                      std::pow(3.0, -1.0 / p) * std::pow(margin, 1.0 / p) / 2.0;
  }
  return out;
}

std::vector<std::string> scenario_names() {
  return {"fig1-noisy-strips", "small-angle-lines", "on-subspace-outliers", "large-magnitude-outlier"};
}

HLMModel scenario(const std::string& name, const nlohmann::json& params, Rng& rng) {
  HLMModel m;
  if (name == "fig1-noisy-strips") {
    reject_unknown(params, {"opening_deg", "half_width", "split", "gap", "control", "rotation_deg"}, name);
    const bool control = params.contains("control") && params.at("control").get<bool>();
    const double opening = param(params, "opening_deg", control ? 90.0 : 60.0) * kDeg;
    const double width = param(params, "half_width", 0.08);
    const double rot = rotation_param(params, rng);
    if (!(width > 0.0 && width < 1.0)) fail(ErrorKind::config, "half_width must lie in (0, 1)");
    m = two_lines(rot, rot + opening, {0.0, 0.5, 0.5});
    // Segment half-length chosen so every rectangle corner stays in the unit disk.
    m.inliers.assign(2, InlierSpec{InlierKind::uniform_ball, std::sqrt(1.0 - width * width), 0.0});
    m.noises[0] = NoiseSpec{NoiseKind::uniform_slab, width, 0.5, 0.0};
    if (control) {
      m.noises[1] = m.noises[0];
    } else {
      m.noises[1] = NoiseSpec{NoiseKind::split_slab, width, param(params, "split", 0.7),
                              param(params, "gap", 0.25)};
    }
  } else if (name == "small-angle-lines") {
    reject_unknown(params, {"theta", "alpha0"}, name);
    const double theta = param(params, "theta", 0.05);
    const double alpha0 = param(params, "alpha0", 1.0 / 3.0);
    m = two_lines(-theta, theta, {alpha0, (1.0 - alpha0) / 2.0, (1.0 - alpha0) / 2.0});
  } else if (name == "on-subspace-outliers") {
    reject_unknown(params, {"opening_deg", "outlier_angle_deg", "alpha0"}, name);
    const double opening = param(params, "opening_deg", 60.0) * kDeg;
    const double alpha0 = param(params, "alpha0", 0.4);
    m = two_lines(0.0, opening, {alpha0, (1.0 - alpha0) / 2.0, (1.0 - alpha0) / 2.0});
    m.outlier.kind = OutlierKind::on_subspace;
    m.outlier.subspace = Subspace::line(param(params, "outlier_angle_deg", 120.0) * kDeg);
  } else if (name == "large-magnitude-outlier") {
    reject_unknown(params, {"opening_deg", "inlier_radius", "inner_radius", "alpha0"}, name);
    const double opening = param(params, "opening_deg", 60.0) * kDeg;
    const double alpha0 = param(params, "alpha0", 0.02);
    m = two_lines(0.0, opening, {alpha0, (1.0 - alpha0) / 2.0, (1.0 - alpha0) / 2.0});
    m.inliers.assign(2, InlierSpec{InlierKind::uniform_ball, param(params, "inlier_radius", 0.05), 0.0});
    m.outlier.kind = OutlierKind::large_magnitude_shell;
    m.outlier.inner_radius = param(params, "inner_radius", 0.95);
  } else {
    fail(ErrorKind::config, "scenario: unknown name '" + name + "'");
  }
  m.validate();
  return m;
}

DeltaKappaBounds delta_kappa_lower_bounds(const HLMModel& model, double p,
                                          const GridSpec& grid, std::size_t budget,
                                          Rng& rng) {
  EnergyParams params(p);
  if (budget < kMinMonteCarloBudget) {
    fail(ErrorKind::budget, "Monte Carlo budget must be at least " + std::to_string(kMinMonteCarloBudget));
  }
  const HLMModel clean = model.with_noise_level(0.0);
  const Dataset data = sample(clean, budget, rng, 0);
  const VoronoiAssignment regions = voronoi_labels(data.points, model.truth);
  const double n = static_cast<double>(budget);

  DeltaKappaBounds out;
  out.samples = budget;
  double best_gap = -1.0;
  double best_matrix = 0.0;
  for (std::size_t i = 0; i < model.truth.size(); ++i) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index r = 0; r < data.points.rows(); ++r) {
      if (regions.labels[static_cast<std::size_t>(r)] == static_cast<int>(i + 1)) idx.push_back(r);
    }
    if (idx.empty()) continue;
    Matrix region(static_cast<Eigen::Index>(idx.size()), model.D);
    for (std::size_t r = 0; r < idx.size(); ++r) region.row(static_cast<Eigen::Index>(r)) = data.points.row(idx[r]);

    const Subspace& truth_i = model.truth[i];
    Subspace fitted = truth_i;
    if (model.D == 2 && model.d == 1) {
      fitted = grid_search_global(region, 1, params.p, grid).tuple[0];
    } else {
      RestrictedFitOptions fit_opts;
      fit_opts.grid = grid;
      fit_opts.seed = rng();
      // Region fit over the single-subspace tuple (truth_i) reuses the
      // restarted IRLS search.
      const auto fits = restricted_best_fit_check(region, SubspaceTuple({truth_i}), params.p, fit_opts);
      if (fits.front().best) fitted = *fits.front().best;
    }
    const SubspaceTuple truth_t({truth_i});
    const SubspaceTuple fit_t({fitted});
    double sum = 0.0;
    double sum_sq = 0.0;
    for (Eigen::Index r = 0; r < region.rows(); ++r) {
      const Vector x = region.row(r).transpose();
      const double diff = point_energy(x, truth_t, params.p) - point_energy(x, fit_t, params.p);
      sum += diff;
      sum_sq += diff * diff;
    }
    // The truth itself is a candidate, so the gap is never negative.
    const double gap = std::max(0.0, sum / n);
    const double var = std::max(0.0, sum_sq / n - (sum / n) * (sum / n));
    if (gap > best_gap) {
      best_gap = gap;
      out.bound_general_stderr = std::sqrt(var / n) / (4.0 * params.p);
    }

    if (params.p >= 2.0) {
      Matrix mean = Matrix::Zero(model.D, model.D);
      for (Eigen::Index r = 0; r < region.rows(); ++r) {
        mean += d_matrix(truth_i, region.row(r).transpose(), params.p);
      }
      mean /= n;
      Eigen::JacobiSVD<Matrix> svd(mean);
      const double spectral = svd.singularValues()(0);
      best_matrix = std::max(best_matrix, spectral * spectral);
    }
  }
  out.bound_general = std::max(0.0, best_gap) / (4.0 * params.p);
  if (params.p >= 2.0) {
    out.bound_p_ge_2 = best_matrix / (params.p * model.d * model.D * std::pow(2.0, params.p + 5.0));
  }
  return out;
}

const std::vector<std::string>& model_keys() {
  static const std::vector<std::string> keys = {
      "K",           "D",           "d",           "truth",        "truth_angles_deg",
      "alphas",      "inlier_kind", "inlier_radius", "inlier_atom", "noise_kind",
      "noise_level", "noise_split", "noise_gap",   "outlier_kind", "outlier_inner_radius",
      "outlier_subspace", "scenario", "scenario_params"};
  return keys;
}

nlohmann::json model_to_json(const HLMModel& m) {
  nlohmann::json j;
  j["K"] = m.K;
  j["D"] = m.D;
  j["d"] = m.d;
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& s : m.truth) truth.push_back(entries_of(s));
  j["truth"] = truth;
  j["alphas"] = m.alphas;
  j["inlier_kind"] = compact(m.inliers, [](const InlierSpec& s) { return std::string(name_of(s.kind)); });
  j["inlier_radius"] = compact(m.inliers, [](const InlierSpec& s) { return s.radius; });
  j["inlier_atom"] = compact(m.inliers, [](const InlierSpec& s) { return s.atom; });
  j["noise_kind"] = compact(m.noises, [](const NoiseSpec& s) { return std::string(name_of(s.kind)); });
  j["noise_level"] = compact(m.noises, [](const NoiseSpec& s) { return s.level; });
  j["noise_split"] = compact(m.noises, [](const NoiseSpec& s) { return s.split; });
  j["noise_gap"] = compact(m.noises, [](const NoiseSpec& s) { return s.gap; });
  j["outlier_kind"] = name_of(m.outlier.kind);
  j["outlier_inner_radius"] = m.outlier.inner_radius;
  if (m.outlier.subspace) j["outlier_subspace"] = entries_of(*m.outlier.subspace);
  return j;
}

HLMModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::config, "model config must be a JSON object");
  const auto& keys = model_keys();
  for (const auto& item : j.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      fail(ErrorKind::config, "unknown key '" + item.key() + "'");
    }
  }
  if (j.contains("scenario")) {
    for (const auto& item : j.items()) {
      if (item.key() != "scenario" && item.key() != "scenario_params") {
        fail(ErrorKind::config, "key '" + item.key() + "' cannot be combined with 'scenario'");
      }
    }
    Rng rng(kDefaultSeed);
    return scenario(j.at("scenario").get<std::string>(),
                    j.contains("scenario_params") ? j.at("scenario_params") : nlohmann::json::object(), rng);
  }
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) fail(ErrorKind::config, std::string("missing key '") + key + "'");
    return j.at(key);
  };
  HLMModel m;
  try {
    m.K = need("K").get<int>();
    m.D = need("D").get<int>();
    m.d = need("d").get<int>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, "K, D and d must be integers");
  }
  if (m.K < 1) fail(ErrorKind::config, "K: must be >= 1");
  if (m.D < 1 || m.d < 1 || m.d > m.D) fail(ErrorKind::config, "d: need 1 <= d <= D");
  const std::size_t k = static_cast<std::size_t>(m.K);

  std::vector<Subspace> truth;
  if (j.contains("truth") && j.contains("truth_angles_deg")) {
    fail(ErrorKind::config, "truth_angles_deg: give either 'truth' or 'truth_angles_deg'");
  }
  if (j.contains("truth_angles_deg")) {
    if (m.D != 2 || m.d != 1) fail(ErrorKind::config, "truth_angles_deg: only for D = 2, d = 1");
    const auto angles = per_component<double>(j.at("truth_angles_deg"), "truth_angles_deg", k);
    for (double a : angles) truth.push_back(Subspace::line(a * kDeg));
  } else {
    const auto& t = need("truth");
    if (!t.is_array() || t.size() != k) fail(ErrorKind::config, "truth: expected K bases");
    for (const auto& entry : t) {
      std::vector<double> e;
      try {
        e = entry.get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        fail(ErrorKind::config, "truth: bases must be arrays of numbers");
      }
      try {
        truth.push_back(Subspace(basis_from_entries(e, m.D, m.d, "truth")));
      } catch (const Error& err) {
        fail(ErrorKind::config, std::string("truth: ") + err.what());
      }
    }
  }
  m.truth = SubspaceTuple(std::move(truth));
  try {
    m.alphas = need("alphas").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, "alphas: must be an array of numbers");
  }

  auto get_or = [&](const char* key, const nlohmann::json& fallback) {
    return j.contains(key) ? j.at(key) : fallback;
  };
  const auto ikind = per_component<std::string>(get_or("inlier_kind", "uniform-ball"), "inlier_kind", k);
  const auto iradius = per_component<double>(get_or("inlier_radius", 1.0), "inlier_radius", k);
  const auto iatom = per_component<double>(get_or("inlier_atom", 0.0), "inlier_atom", k);
  const auto nkind = per_component<std::string>(get_or("noise_kind", "none"), "noise_kind", k);
  const auto nlevel = per_component<double>(get_or("noise_level", 0.0), "noise_level", k);
  const auto nsplit = per_component<double>(get_or("noise_split", 0.5), "noise_split", k);
  const auto ngap = per_component<double>(get_or("noise_gap", 0.0), "noise_gap", k);
  for (std::size_t i = 0; i < k; ++i) {
    m.inliers.push_back(InlierSpec{inlier_kind_from(ikind[i]), iradius[i], iatom[i]});
    m.noises.push_back(NoiseSpec{noise_kind_from(nkind[i]), nlevel[i], nsplit[i], ngap[i]});
  }
  try {
    m.outlier.kind = outlier_kind_from(get_or("outlier_kind", "uniform-ball-D").get<std::string>());
    m.outlier.inner_radius = get_or("outlier_inner_radius", 0.0).get<double>();
    if (j.contains("outlier_subspace")) {
      const auto e = j.at("outlier_subspace").get<std::vector<double>>();
      const int d0 = static_cast<int>(e.size()) / m.D;
      if (d0 < 1) fail(ErrorKind::config, "outlier_subspace: too few entries");
      m.outlier.subspace = Subspace(basis_from_entries(e, m.D, d0, "outlier_subspace"));
    }
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::config, "outlier_*: wrong value type");
  }
  m.validate();
  return m;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  const Eigen::Index dims = data.points.cols();
  for (Eigen::Index c = 0; c < dims; ++c) out << 'x' << (c + 1) << ',';
  out << "label\n";
  char buf[40];
  for (Eigen::Index r = 0; r < data.points.rows(); ++r) {
    for (Eigen::Index c = 0; c < dims; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g,", data.points(r, c));
      out << buf;
    }
    out << data.labels[static_cast<std::size_t>(r)] << '\n';
  }
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::io, path + ": empty file");
  const long columns = std::count(line.begin(), line.end(), ',') + 1;
  if (columns < 2) fail(ErrorKind::io, path + ": need coordinates and a label column");
  const Eigen::Index dims = columns - 1;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::io, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (static_cast<long>(row.size()) != columns) {
      fail(ErrorKind::io, path + ":" + std::to_string(lineno) + ": wrong column count");
    }
    labels.push_back(static_cast<int>(row.back()));
    row.pop_back();
    rows.push_back(std::move(row));
  }
  Dataset out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), dims);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < dims; ++c) out.points(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  out.labels = std::move(labels);
  return out;
}

namespace {
constexpr char kMagic[8] = {'H', 'L', 'M', 'D', 'A', 'T', 'A', '1'};
}

void write_dataset_binary(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  const std::uint64_t n = static_cast<std::uint64_t>(data.points.rows());
  const std::uint64_t dims = static_cast<std::uint64_t>(data.points.cols());
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(&data.seed), sizeof data.seed);
  for (Eigen::Index r = 0; r < data.points.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.points.cols(); ++c) {
      const double v = data.points(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  for (int label : data.labels) {
    const std::int32_t v = label;
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

Dataset read_dataset_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  char magic[8];
  std::uint64_t n = 0;
  std::uint64_t dims = 0;
  Dataset out;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&dims), sizeof dims);
  in.read(reinterpret_cast<char*>(&out.seed), sizeof out.seed);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) fail(ErrorKind::io, path + ": not a dataset file");
  out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  for (Eigen::Index r = 0; r < out.points.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.points.cols(); ++c) {
      in.read(reinterpret_cast<char*>(&out.points(r, c)), sizeof(double));
    }
  }
  out.labels.resize(n);
  for (auto& label : out.labels) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    label = v;
  }
  if (!in) fail(ErrorKind::io, path + ": truncated dataset file");
  return out;
}

}  // namespace hlm
