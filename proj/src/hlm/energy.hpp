#pragma once

// The l_p energy of a point set with respect to a union of subspaces, the
// Voronoi-type regions it induces, and first-order quantities.
//
// Point sets are N x D matrices, one point per row.

#include <cstddef>
#include <optional>
#include <vector>

#include "hlm/common.hpp"
#include "hlm/grassmann.hpp"

namespace hlm {

struct EnergyParams {
  double p = 1.0;
  explicit EnergyParams(double p_value);
};

inline constexpr double kVoronoiTieTol = 1e-12;

double point_energy(const Vector& x, const SubspaceTuple& tuple, double p);

struct EnergyTotals {
  double sum = 0.0;
  double mean = 0.0;
};

// Sum and mean of point_energy over the rows of `points`. The mean of an
// empty set is an error; the sum is 0.
EnergyTotals dataset_energy(const Matrix& points, const SubspaceTuple& tuple, double p);
double energy_sum(const Matrix& points, const SubspaceTuple& tuple, double p);

// Per-point distances to every subspace, K columns.
Matrix distance_table(const Matrix& points, const SubspaceTuple& tuple);

struct VoronoiAssignment {
  std::vector<int> labels;  // 1-based region index
  std::vector<bool> tie;    // true when the two closest distances differ < 1e-12
};

VoronoiAssignment voronoi_labels(const Matrix& points, const SubspaceTuple& tuple);

// P_L(x) P_L^perp(x)^T dist(x, L)^(p - 2).
Matrix d_matrix(const Subspace& l, const Vector& x, double p);

struct FirstOrderResidual {
  bool empty_region = false;
  Matrix mean;             // D x D, mean over the region's points
  double frobenius = 0.0;
  std::size_t used = 0;     // points contributing to the mean
  std::size_t skipped = 0;  // points lying on L_j (excluded when p < 2)
};

// Mean of d_matrix(L_j, x, p) over the Voronoi region j (1-based).
FirstOrderResidual first_order_residual(const Matrix& points, const SubspaceTuple& tuple,
                                        std::size_t region, double p);

// Coordinate-wise geodesic path from A to B with the farthest coordinate at
// unit speed; returns (E(h) - E(0)) / h^p.
double geodesic_directional_derivative(const Matrix& points, const SubspaceTuple& a,
                                       const SubspaceTuple& b, double p, double h);

// Point on the product path at parameter t (same parametrization as above).
SubspaceTuple product_geodesic(const SubspaceTuple& a, const SubspaceTuple& b, double t);

struct SensitivityHypotheses {
  bool applicable = false;   // B differs from A in exactly one coordinate != region
  std::size_t perturbed = 0; // 0-based index of that coordinate
  bool nondegenerate = false;  // both conditions on theta_{d*} being positive
  bool ordering = false;       // the perturbed angles do not exceed the others
  bool holds() const { return applicable && nondegenerate && ordering; }
};

// The two hypotheses under which perturbing one subspace must change the
// Lebesgue measure of another Voronoi region.
SensitivityHypotheses region_sensitivity_hypotheses(const SubspaceTuple& a,
                                                    const SubspaceTuple& b,
                                                    std::size_t region);

struct MeasureEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  Interval ci99;
  std::size_t hits = 0;
  std::size_t samples = 0;
  SensitivityHypotheses hypotheses;
};

inline constexpr std::size_t kMinMonteCarloBudget = 1000;

// Fraction of the unit ball lying in exactly one of the two versions of the
// region (1-based `region`) induced by A and by B.
MeasureEstimate voronoi_symmetric_difference(const SubspaceTuple& a, const SubspaceTuple& b,
                                             std::size_t region, std::size_t budget,
                                             Rng& rng);

// Uniform sample from the unit ball of R^n.
Vector uniform_ball_point(int n, Rng& rng);
Vector uniform_sphere_point(int n, Rng& rng);

}  // namespace hlm
