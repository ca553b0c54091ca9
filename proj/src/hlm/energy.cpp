#include "hlm/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hlm {

namespace {

void require_points(const Matrix& points, const SubspaceTuple& tuple) {
  if (tuple.empty()) fail(ErrorKind::shape, "empty subspace tuple");
  if (points.cols() != tuple.ambient_dim()) {
    fail(ErrorKind::shape, "points have dimension " + std::to_string(points.cols()) +
                               ", tuple lives in R^" + std::to_string(tuple.ambient_dim()));
  }
}

double lp(double dist, double p) {
  if (p == 1.0) return dist;
  if (p == 2.0) return dist * dist;
  return std::pow(dist, p);
}

// Numerically on the subspace: the residual is at rounding level.
bool on_subspace(double dist, double norm) { return dist <= 1e-14 * norm; }

double theta_dstar(const Subspace& x, const Subspace& y) {
  const int dstar = std::min(x.dim(), x.ambient_dim() - x.dim());
  const PrincipalAngles pa = principal_angles(x, y);
  // d*-th largest of the ascending list.
  return pa.angles[pa.angles.size() - static_cast<std::size_t>(dstar)];
}

}  // namespace

EnergyParams::EnergyParams(double p_value) : p(p_value) {
  if (!(p_value > 0.0) || !std::isfinite(p_value)) {
    fail(ErrorKind::domain, "energy exponent p must be positive and finite");
  }
}

double point_energy(const Vector& x, const SubspaceTuple& tuple, double p) {
  EnergyParams params(p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : tuple) best = std::min(best, dist_point(l, x));
  return lp(best, params.p);
}

double energy_sum(const Matrix& points, const SubspaceTuple& tuple, double p) {
  EnergyParams params(p);
  const Matrix table = distance_table(points, tuple);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) sum += lp(table.row(i).minCoeff(), params.p);
  return sum;
}

EnergyTotals dataset_energy(const Matrix& points, const SubspaceTuple& tuple, double p) {
  EnergyTotals out;
  out.sum = energy_sum(points, tuple, p);
  if (points.rows() == 0) fail(ErrorKind::empty, "mean energy of an empty dataset");
  out.mean = out.sum / static_cast<double>(points.rows());
  return out;
}

Matrix distance_table(const Matrix& points, const SubspaceTuple& tuple) {
  require_points(points, tuple);
  Matrix table(points.rows(), static_cast<Eigen::Index>(tuple.size()));
  for (std::size_t k = 0; k < tuple.size(); ++k) {
    const Matrix& b = tuple[k].basis();
    const Matrix resid = points - (points * b) * b.transpose();
    table.col(static_cast<Eigen::Index>(k)) = resid.rowwise().norm();
  }
  return table;
}

VoronoiAssignment voronoi_labels(const Matrix& points, const SubspaceTuple& tuple) {
  const Matrix table = distance_table(points, tuple);
  VoronoiAssignment out;
  out.labels.resize(static_cast<std::size_t>(points.rows()));
  out.tie.resize(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < table.cols(); ++k) {
      if (table(i, k) < table(i, best)) best = k;
    }
    bool tie = false;
    for (Eigen::Index k = 0; k < table.cols(); ++k) {
      if (k != best && table(i, k) - table(i, best) < kVoronoiTieTol) tie = true;
    }
    // Smallest index among the tied candidates.
    for (Eigen::Index k = 0; k < best; ++k) {
      if (table(i, k) - table(i, best) < kVoronoiTieTol) {
        best = k;
        break;
      }
    }
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
    out.tie[static_cast<std::size_t>(i)] = tie;
  }
  return out;
}

Matrix d_matrix(const Subspace& l, const Vector& x, double p) {
  EnergyParams params(p);
  const Vector proj = project(l, x);
  const Vector perp = x - proj;
  const double dist = perp.norm();
  const Eigen::Index n = x.size();
  if (on_subspace(dist, x.norm())) {
    if (params.p < 2.0) {
      fail(ErrorKind::domain, "d_matrix is singular for points on the subspace when p < 2");
    }
    return Matrix::Zero(n, n);
  }
  return proj * perp.transpose() * std::pow(dist, params.p - 2.0);
}

FirstOrderResidual first_order_residual(const Matrix& points, const SubspaceTuple& tuple,
                                        std::size_t region, double p) {
  EnergyParams params(p);
  if (region < 1 || region > tuple.size()) {
    fail(ErrorKind::shape, "region index out of range");
  }
  const VoronoiAssignment assign = voronoi_labels(points, tuple);
  const Subspace& l = tuple[region - 1];
  const Eigen::Index n = points.cols();
  FirstOrderResidual out;
  out.mean = Matrix::Zero(n, n);
  std::size_t members = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (assign.labels[static_cast<std::size_t>(i)] != static_cast<int>(region)) continue;
    ++members;
    const Vector x = points.row(i).transpose();
    const Vector perp = residual(l, x);
    if (on_subspace(perp.norm(), x.norm()) && params.p < 2.0) {
      ++out.skipped;
      continue;
    }
    out.mean += d_matrix(l, x, params.p);
    ++out.used;
  }
  if (members == 0) {
    out.empty_region = true;
    return out;
  }
  if (out.used > 0) out.mean /= static_cast<double>(out.used);
  out.frobenius = out.mean.norm();
  return out;
}

SubspaceTuple product_geodesic(const SubspaceTuple& a, const SubspaceTuple& b, double t) {
  if (a.size() != b.size()) fail(ErrorKind::shape, "tuples differ in K");
  std::vector<double> lengths(a.size());
  double longest = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lengths[i] = dist_grassmann(a[i], b[i]);
    longest = std::max(longest, lengths[i]);
  }
  if (longest == 0.0) return a;
  std::vector<Subspace> members;
  members.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    members.push_back(geodesic(a[i], b[i], std::min(lengths[i], t * lengths[i] / longest)));
  }
  return SubspaceTuple(std::move(members));
}

double geodesic_directional_derivative(const Matrix& points, const SubspaceTuple& a,
                                       const SubspaceTuple& b, double p, double h) {
  EnergyParams params(p);
  if (!(h > 0.0)) fail(ErrorKind::domain, "step h must be positive");
  if (dist_tuple(a, b) == 0.0) return 0.0;
  const SubspaceTuple moved = product_geodesic(a, b, h);
  const double e0 = energy_sum(points, a, params.p);
  const double e1 = energy_sum(points, moved, params.p);
  return (e1 - e0) / std::pow(h, params.p);
}

SensitivityHypotheses region_sensitivity_hypotheses(const SubspaceTuple& a,
                                                    const SubspaceTuple& b,
                                                    std::size_t region) {
  if (a.size() != b.size()) fail(ErrorKind::shape, "tuples differ in K");
  if (region < 1 || region > a.size()) fail(ErrorKind::shape, "region index out of range");
  SensitivityHypotheses out;
  if (a.dim() == a.ambient_dim()) return out;
  std::vector<std::size_t> changed;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (dist_grassmann(a[i], b[i]) > 1e-12) changed.push_back(i);
  }
  const std::size_t j = region - 1;
  if (changed.size() != 1 || changed.front() == j) return out;
  out.applicable = true;
  const std::size_t i = changed.front();
  out.perturbed = i;
  constexpr double kPositive = 1e-12;

  bool nondegenerate = true;
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (m != i && theta_dstar(b[i], a[m]) <= kPositive) nondegenerate = false;
    for (std::size_t n = m + 1; n < a.size(); ++n) {
      if (theta_dstar(a[m], a[n]) <= kPositive) nondegenerate = false;
    }
  }
  out.nondegenerate = nondegenerate;

  const double moved = std::max(theta_dstar(b[i], a[j]), theta_dstar(a[i], a[j]));
  double others = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (m != i && m != j) others = std::min(others, theta_dstar(a[m], a[j]));
  }
  out.ordering = moved <= others;
  return out;
}

Vector uniform_sphere_point(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

Vector uniform_ball_point(int n, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vector dir = uniform_sphere_point(n, rng);
  return dir * std::pow(unit(rng), 1.0 / n);
}

MeasureEstimate voronoi_symmetric_difference(const SubspaceTuple& a, const SubspaceTuple& b,
                                             std::size_t region, std::size_t budget,
                                             Rng& rng) {
  if (budget < kMinMonteCarloBudget) {
    fail(ErrorKind::budget, "Monte Carlo budget must be at least " +
                                std::to_string(kMinMonteCarloBudget));
  }
  if (a.size() != b.size() || a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim()) {
    fail(ErrorKind::shape, "tuples must share (K, D, d)");
  }
  if (region < 1 || region > a.size()) fail(ErrorKind::shape, "region index out of range");
  const std::size_t j = region - 1;
  const int n = a.ambient_dim();

  auto inside = [j](const SubspaceTuple& t, const Vector& x) {
    const double own = dist_point(t[j], x);
    for (std::size_t m = 0; m < t.size(); ++m) {
      if (m != j && !(own < dist_point(t[m], x))) return false;
    }
    return true;
  };

  MeasureEstimate out;
  out.samples = budget;
  for (std::size_t s = 0; s < budget; ++s) {
    const Vector x = uniform_ball_point(n, rng);
    if (inside(a, x) != inside(b, x)) ++out.hits;
  }
  const double nn = static_cast<double>(budget);
  out.estimate = static_cast<double>(out.hits) / nn;
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / nn);
  out.ci99 = wilson_interval(out.hits, budget, 2.5758293035489004);
  out.hypotheses = region_sensitivity_hypotheses(a, b, region);
  return out;
}

}  // namespace hlm
