#pragma once

// Minimizers of the l_p energy over G(D,d)^K.
//
//  * fit_subspace_lp      one subspace, exact for p = 2, IRLS otherwise
//  * lp_kflats            alternating assignment / refit (K-flats skeleton)
//  * multi_restart        best of several lp_kflats runs
//  * grid_search_global   exhaustive angle grid for lines in the plane
//
// plus two diagnostics for candidate minimizers: a randomized local-minimum
// certificate and the per-region best-fit consistency check.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "hlm/common.hpp"
#include "hlm/grassmann.hpp"

namespace hlm {

struct OptResult {
  SubspaceTuple tuple;
  double energy = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // history[0] is the starting energy, then one entry per iteration.
  std::vector<double> history;
  std::size_t restarts_used = 1;
};

nlohmann::json to_json(const OptResult& r);
OptResult opt_result_from_json(const nlohmann::json& j);

// Angle grid over [0, pi) for D = 2, d = 1. The coarse step is rounded down
// so that it divides pi; each refinement level shrinks it by kGridRefineFactor.
struct GridSpec {
  double step = 0.5 * 3.14159265358979323846 / 180.0;
  int levels = 2;

  void validate() const;
  std::size_t coarse_count() const;
  double coarse_step() const;
  double final_resolution() const;
};

inline constexpr int kGridRefineFactor = 10;
inline constexpr std::size_t kGridCandidates = 4;

struct IrlsOptions {
  double tol = 1e-9;
  int max_iter = 200;
  std::optional<Subspace> init;
};

Subspace fit_subspace_lp(const Matrix& points, int d, double p, const IrlsOptions& opts = {});

// Top-d principal subspace of sum_x w_x x x^T.
Subspace weighted_principal_subspace(const Matrix& points, const Vector& weights, int d);

struct KFlatsOptions {
  int max_iter = 200;
  double tol = 1e-12;
  std::uint64_t seed = kDefaultSeed;  // only used to pad degenerate re-seeds
};

OptResult lp_kflats(const Matrix& points, std::size_t k, int d, double p,
                    const SubspaceTuple& init, const KFlatsOptions& opts = {});
OptResult lp_kflats(const Matrix& points, std::size_t k, int d, double p,
                    std::uint64_t init_seed, const KFlatsOptions& opts = {});

// Greedy farthest-point initialization: each subspace is the principal
// subspace of the points most aligned with the point worst fit so far.
SubspaceTuple farthest_point_init(const Matrix& points, std::size_t k, int d);

// Runs `seeded` initializations first, then one farthest-point start, then
// n_restarts random starts. The result is the energy argmin, earliest index
// on ties.
OptResult multi_restart(const Matrix& points, std::size_t k, int d, double p,
                        std::size_t n_restarts, std::uint64_t seed,
                        std::span<const SubspaceTuple> seeded = {},
                        const KFlatsOptions& opts = {}, int workers = 1);

OptResult grid_search_global(const Matrix& points, std::size_t k, double p,
                             const GridSpec& spec, int workers = 1);

// Energy of lines at the given angles (D = 2). Shared by the grid oracle and
// its tests.
double line_energy(const Matrix& points, std::span<const double> angles, double p);

struct Certificate {
  bool is_local_min = false;
  double worst_direction_gap = 0.0;
  std::size_t directions = 0;
  std::size_t resampled = 0;
};

Certificate local_min_certificate(const Matrix& points, const SubspaceTuple& tuple,
                                  double p, std::size_t n_directions, double step,
                                  Rng& rng);

struct RestrictedFitOptions {
  GridSpec grid;
  std::size_t restarts = 8;
  std::uint64_t seed = kDefaultSeed;
};

struct RegionFit {
  std::size_t region = 0;  // 1-based
  std::size_t count = 0;
  bool empty = false;
  std::optional<Subspace> best;
  double distance = 0.0;
};

std::vector<RegionFit> restricted_best_fit_check(const Matrix& points,
                                                 const SubspaceTuple& tuple, double p,
                                                 const RestrictedFitOptions& opts = {});

}  // namespace hlm
