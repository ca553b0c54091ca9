#pragma once

// Geometry of the Grassmannian G(D,d) and of the product G(D,d)^K.
//
// A subspace is stored as a D x d matrix with orthonormal columns. Distances
// are the principal-angle (arc length) metric on G(D,d) and the l-infinity
// product metric on tuples.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlm/common.hpp"

namespace hlm {

inline constexpr double kOrthonormalTol = 1e-10;
inline constexpr double kRankTol = 1e-8;

class Subspace {
 public:
  // `basis` must already be orthonormal to within kOrthonormalTol.
  explicit Subspace(Matrix basis);

  // Orthonormalizes the columns of `vectors` (which must have full column
  // rank at kRankTol).
  static Subspace from_spanning(const Matrix& vectors);

  // The line through the origin at `angle` radians in R^2.
  static Subspace line(double angle);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Matrix& basis() const { return basis_; }

  Matrix projector() const { return basis_ * basis_.transpose(); }

 private:
  Matrix basis_;
};

class SubspaceTuple {
 public:
  SubspaceTuple() = default;
  explicit SubspaceTuple(std::vector<Subspace> members);

  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  int ambient_dim() const { return members_.front().ambient_dim(); }
  int dim() const { return members_.front().dim(); }

  const Subspace& operator[](std::size_t i) const { return members_[i]; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  const std::vector<Subspace>& members() const { return members_; }

  SubspaceTuple with(std::size_t i, Subspace replacement) const;
  SubspaceTuple permuted(const std::vector<std::size_t>& order) const;

 private:
  std::vector<Subspace> members_;
};

// Sorted ascending, each in [0, pi/2].
struct PrincipalAngles {
  std::vector<double> angles;
};

// Principal vectors: columns of `u` span F, columns of `v` span G, paired so
// that u_i . v_i = cos(theta_i), ordered by increasing angle.
struct PrincipalPairs {
  Vector angles;
  Matrix u;
  Matrix v;
};

PrincipalPairs principal_pairs(const Subspace& f, const Subspace& g);
PrincipalAngles principal_angles(const Subspace& f, const Subspace& g);
double dist_grassmann(const Subspace& f, const Subspace& g);
double dist_tuple(const SubspaceTuple& a, const SubspaceTuple& b);

struct Recovery {
  double distance = 0.0;
  // a.permuted(permutation) is the arrangement closest to b.
  std::vector<std::size_t> permutation;
};

inline constexpr std::size_t kMaxPermutationK = 10;

Recovery recovery_distance(const SubspaceTuple& a, const SubspaceTuple& b);

Vector project(const Subspace& l, const Vector& x);
Vector residual(const Subspace& l, const Vector& x);
double dist_point(const Subspace& l, const Vector& x);

// Arc-length geodesic from F (t = 0) to G (t = dist_grassmann(F, G)).
Subspace geodesic(const Subspace& f, const Subspace& g, double t);

// exp_F(t * H) for a tangent H (D x d with F^T H = 0). With ||H||_F = 1 the
// path is unit speed up to the cut locus.
Subspace geodesic_along(const Subspace& f, const Matrix& tangent, double t);

// Gaussian tangent at F (not normalized).
Matrix random_tangent(const Subspace& f, Rng& rng);

// L* minus (L intersect L*), i.e. L* intersected with the orthogonal complement
// of the intersection. nullopt when the result is {0}.
std::optional<Subspace> orthogonal_subtraction(const Subspace& lstar,
                                               const Subspace& l);

// Orthonormal basis (D x (D-d)) of the orthogonal complement. For lines in
// R^2 the normal is oriented so that (direction, normal) is positive.
Matrix orthogonal_complement(const Subspace& l);

Subspace random_subspace(int ambient_dim, int dim, Rng& rng);
SubspaceTuple random_tuple(std::size_t k, int ambient_dim, int dim, Rng& rng);

// Serialization: "D d" followed by the column-major basis at 17 significant
// digits.
std::string to_text(const Subspace& s);
Subspace subspace_from_text(const std::string& text);

nlohmann::json to_json(const Subspace& s);
Subspace subspace_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SubspaceTuple& t);
SubspaceTuple tuple_from_json(const nlohmann::json& j);

}  // namespace hlm
