#pragma once

// Hybrid linear model (HLM) mixtures: K subspaces carrying inlier
// distributions with bounded orthogonal noise, plus an outlier component.
// Also the model constants (psi, tau0) and the recovery-condition calculators
// built on them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlm/common.hpp"
#include "hlm/grassmann.hpp"
#include "hlm/optimize.hpp"

namespace hlm {

enum class InlierKind { uniform_ball, uniform_sphere };

// Spherically symmetric law inside the carrying subspace: uniform on the
// d-ball (or its boundary sphere) of radius `radius`, plus an atom at 0.
struct InlierSpec {
  InlierKind kind = InlierKind::uniform_ball;
  double radius = 1.0;
  double atom = 0.0;

  void validate() const;
  bool operator==(const InlierSpec&) const = default;
};

enum class NoiseKind { none, uniform_slab, uniform_orthogonal_ball, split_slab };

// Orthogonal noise with support radius `level`.
//  uniform_slab            uniform direction in L-perp, magnitude U[0, level]
//  uniform_orthogonal_ball uniform in the (D-d)-ball of radius `level`
//  split_slab              codimension 1 only: offset along the oriented
//                          normal, U[gap*level, level] with probability
//                          `split`, otherwise the mirrored interval
struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double level = 0.0;
  double split = 0.5;
  double gap = 0.0;

  void validate() const;
  double support_radius() const { return kind == NoiseKind::none ? 0.0 : level; }
  bool operator==(const NoiseSpec&) const = default;
};

enum class OutlierKind { uniform_ball, on_subspace, large_magnitude_shell };

struct OutlierSpec {
  OutlierKind kind = OutlierKind::uniform_ball;
  double inner_radius = 0.0;         // large_magnitude_shell
  std::optional<Subspace> subspace;  // on_subspace

  void validate(int ambient_dim) const;
};

bool operator==(const OutlierSpec& a, const OutlierSpec& b);

struct HLMModel {
  int K = 0;
  int D = 0;
  int d = 0;
  SubspaceTuple truth;
  std::vector<double> alphas;         // K + 1 entries, outliers first
  std::vector<InlierSpec> inliers;    // one per component
  std::vector<NoiseSpec> noises;      // one per component
  OutlierSpec outlier;

  void validate() const;
  double noise_level() const;
  double min_inlier_weight() const;
  double min_pairwise_distance() const;
  // All components share one spherically symmetric inlier law.
  bool weakly_symmetric() const;
  // Replaces alpha_0 and rescales the inlier weights to keep their ratios.
  HLMModel with_outlier_weight(double alpha0) const;
  // Sets the noise level of every component (kind none becomes uniform_slab).
  HLMModel with_noise_level(double eps) const;
};

bool operator==(const HLMModel& a, const HLMModel& b);

struct Dataset {
  Matrix points;            // N x D
  std::vector<int> labels;  // 0 = outlier, i = component i
  std::uint64_t seed = 0;
};

Dataset sample(const HLMModel& model, std::size_t n, std::uint64_t seed);
Dataset sample(const HLMModel& model, std::size_t n, Rng& rng, std::uint64_t seed_tag);

// Points of a single inlier component (without noise), used by Monte Carlo
// checks of the model constants.
Matrix sample_inliers(const HLMModel& model, std::size_t component, std::size_t n, Rng& rng);

double psi(const InlierSpec& spec, int d, double t);
double psi_inverse(const InlierSpec& spec, int d, double q);
double tau0(const HLMModel& model, double p);
double tau0_lower_bound_uniform(int d, double p, int k, double r1, double r2);

struct ConditionReport {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double tau0 = 0.0;
};

ConditionReport check_exact_recovery_condition(const HLMModel& model, double p);

struct NoiseBounds {
  double tau0 = 0.0;
  double eps = 0.0;
  std::optional<double> eps_max;
  std::optional<double> f;
  std::optional<double> eps_ceiling;
};

NoiseBounds noise_recovery_bounds(const HLMModel& model, double p);

// Named counterexample / failure-mode generators. `params` is a JSON object
// of overrides; unknown keys are config errors.
HLMModel scenario(const std::string& name, const nlohmann::json& params, Rng& rng);
std::vector<std::string> scenario_names();

struct DeltaKappaBounds {
  double bound_general = 0.0;
  double bound_general_stderr = 0.0;
  std::optional<double> bound_p_ge_2;
  std::size_t samples = 0;
};

DeltaKappaBounds delta_kappa_lower_bounds(const HLMModel& model, double p,
                                          const GridSpec& grid, std::size_t budget,
                                          Rng& rng);

// Flat-key JSON config of a model. Unknown keys are errors naming the key.
nlohmann::json model_to_json(const HLMModel& model);
HLMModel model_from_json(const nlohmann::json& j);
// Keys accepted by model_from_json.
const std::vector<std::string>& model_keys();

void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_binary(const Dataset& data, const std::string& path);
Dataset read_dataset_binary(const std::string& path);

}  // namespace hlm
