#include "hlm/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

namespace hlm {

namespace {

void require_same_shape(const Subspace& f, const Subspace& g) {
  if (f.ambient_dim() != g.ambient_dim() || f.dim() != g.dim()) {
    fail(ErrorKind::shape, "subspaces differ in (D, d): (" +
                               std::to_string(f.ambient_dim()) + ", " +
                               std::to_string(f.dim()) + ") vs (" +
                               std::to_string(g.ambient_dim()) + ", " +
                               std::to_string(g.dim()) + ")");
  }
}

void require_same_shape(const SubspaceTuple& a, const SubspaceTuple& b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::shape, "tuples differ in K: " + std::to_string(a.size()) +
                               " vs " + std::to_string(b.size()));
  }
  if (!a.empty()) require_same_shape(a[0], b[0]);
}

void require_length(const Subspace& l, const Vector& x) {
  if (x.size() != l.ambient_dim()) {
    fail(ErrorKind::shape, "point has length " + std::to_string(x.size()) +
                               ", expected " + std::to_string(l.ambient_dim()));
  }
}

Matrix orthonormalize(const Matrix& vectors) {
  Eigen::JacobiSVD<Matrix> svd(vectors);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= kRankTol * std::max(1.0, s(0))) {
    fail(ErrorKind::shape, "vectors do not span a subspace of dimension " +
                               std::to_string(vectors.cols()));
  }
  Eigen::HouseholderQR<Matrix> qr(vectors);
  return qr.householderQ() * Matrix::Identity(vectors.rows(), vectors.cols());
}

}  // namespace

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.rows() < basis_.cols()) {
    fail(ErrorKind::shape, "subspace requires 1 <= d <= D, got D=" +
                               std::to_string(basis_.rows()) +
                               " d=" + std::to_string(basis_.cols()));
  }
  const Matrix gram = basis_.transpose() * basis_;
  const double dev =
      (gram - Matrix::Identity(basis_.cols(), basis_.cols())).cwiseAbs().maxCoeff();
  if (!(dev <= kOrthonormalTol)) {
    fail(ErrorKind::shape, "basis is not orthonormal (deviation " +
                               std::to_string(dev) + ")");
  }
}

Subspace Subspace::from_spanning(const Matrix& vectors) {
  if (vectors.cols() < 1 || vectors.rows() < vectors.cols()) {
    fail(ErrorKind::shape, "cannot span a subspace from a " +
                               std::to_string(vectors.rows()) + "x" +
                               std::to_string(vectors.cols()) + " matrix");
  }
  return Subspace(orthonormalize(vectors));
}

Subspace Subspace::line(double angle) {
  Matrix b(2, 1);
  b << std::cos(angle), std::sin(angle);
  return Subspace(std::move(b));
}

SubspaceTuple::SubspaceTuple(std::vector<Subspace> members)
    : members_(std::move(members)) {
  if (members_.empty()) fail(ErrorKind::shape, "tuple needs K >= 1");
  for (const auto& m : members_) require_same_shape(members_.front(), m);
}

SubspaceTuple SubspaceTuple::with(std::size_t i, Subspace replacement) const {
  std::vector<Subspace> next = members_;
  next.at(i) = std::move(replacement);
  return SubspaceTuple(std::move(next));
}

SubspaceTuple SubspaceTuple::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != members_.size()) fail(ErrorKind::shape, "bad permutation length");
  std::vector<Subspace> next;
  next.reserve(order.size());
  for (std::size_t i : order) next.push_back(members_.at(i));
  return SubspaceTuple(std::move(next));
}

PrincipalPairs principal_pairs(const Subspace& f, const Subspace& g) {
  require_same_shape(f, g);
  const Matrix cross = f.basis().transpose() * g.basis();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PrincipalPairs out;
  out.u = f.basis() * svd.matrixU();
  out.v = g.basis() * svd.matrixV();
  const Eigen::Index d = cross.cols();
  out.angles.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    // |u - v|^2 = 2 - 2 sigma, evaluated from the vectors to keep small
    // angles accurate.
    const double chord = (out.u.col(i) - out.v.col(i)).norm();
    double theta = 2.0 * std::asin(std::clamp(chord / 2.0, 0.0, 1.0));
    const double sigma = std::clamp(svd.singularValues()(i), 0.0, 1.0);
    if (sigma < 0.5) theta = std::acos(sigma);
    out.angles(i) = std::clamp(theta, 0.0, std::numbers::pi / 2);
  }
  return out;
}

PrincipalAngles principal_angles(const Subspace& f, const Subspace& g) {
  require_same_shape(f, g);
  // Fixed argument order so that the angles are bitwise symmetric.
  const double* fb = f.basis().data();
  const double* gb = g.basis().data();
  const auto n = f.basis().size();
  const bool swap = std::lexicographical_compare(gb, gb + n, fb, fb + n);
  const PrincipalPairs pairs = swap ? principal_pairs(g, f) : principal_pairs(f, g);
  PrincipalAngles out;
  out.angles.assign(pairs.angles.data(), pairs.angles.data() + pairs.angles.size());
  std::sort(out.angles.begin(), out.angles.end());
  return out;
}

double dist_grassmann(const Subspace& f, const Subspace& g) {
  const PrincipalAngles pa = principal_angles(f, g);
  double sum = 0.0;
  for (double t : pa.angles) sum += t * t;
  return std::sqrt(sum);
}

double dist_tuple(const SubspaceTuple& a, const SubspaceTuple& b) {
  require_same_shape(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, dist_grassmann(a[i], b[i]));
  }
  return worst;
}

Recovery recovery_distance(const SubspaceTuple& a, const SubspaceTuple& b) {
  require_same_shape(a, b);
  const std::size_t k = a.size();
  if (k > kMaxPermutationK) {
    fail(ErrorKind::capability, "recovery_distance enumerates permutations only for K <= " +
                                    std::to_string(kMaxPermutationK));
  }
  // Pairwise distances once; permutations only index into the table.
  std::vector<double> table(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) table[i * k + j] = dist_grassmann(a[i], b[j]);
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  Recovery best;
  best.distance = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t pos = 0; pos < k; ++pos) {
      worst = std::max(worst, table[perm[pos] * k + pos]);
    }
    if (worst < best.distance) {
      best.distance = worst;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Vector project(const Subspace& l, const Vector& x) {
  require_length(l, x);
  return l.basis() * (l.basis().transpose() * x);
}

Vector residual(const Subspace& l, const Vector& x) {
  require_length(l, x);
  return x - l.basis() * (l.basis().transpose() * x);
}

double dist_point(const Subspace& l, const Vector& x) {
  return residual(l, x).norm();
}

Subspace geodesic(const Subspace& f, const Subspace& g, double t) {
  const PrincipalPairs pairs = principal_pairs(f, g);
  const double total = pairs.angles.norm();
  if (pairs.angles.size() > 0 &&
      pairs.angles.maxCoeff() >= std::numbers::pi / 2 - 1e-9) {
    fail(ErrorKind::degenerate,
         "geodesic is not unique: a principal angle equals pi/2");
  }
  if (t < 0.0 || t > total * (1.0 + 1e-12) + 1e-15) {
    fail(ErrorKind::domain, "geodesic parameter outside [0, dist]");
  }
  if (total == 0.0) return f;
  const Eigen::Index d = pairs.angles.size();
  Matrix cols(f.ambient_dim(), d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double theta = pairs.angles(i);
    const double s = theta * t / total;
    if (theta < 1e-15) {
      cols.col(i) = pairs.u.col(i);
      continue;
    }
    Vector w = pairs.v.col(i) - pairs.u.col(i) * std::cos(theta);
    w /= w.norm();
    cols.col(i) = pairs.u.col(i) * std::cos(s) + w * std::sin(s);
  }
  return Subspace::from_spanning(cols);
}

Subspace geodesic_along(const Subspace& f, const Matrix& tangent, double t) {
  if (tangent.rows() != f.ambient_dim() || tangent.cols() != f.dim()) {
    fail(ErrorKind::shape, "tangent must be D x d");
  }
  Eigen::JacobiSVD<Matrix> svd(tangent, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sigma = svd.singularValues() * t;
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  Matrix next = f.basis() * v * sigma.array().cos().matrix().asDiagonal() * v.transpose() +
                u * sigma.array().sin().matrix().asDiagonal() * v.transpose();
  return Subspace::from_spanning(next);
}

Matrix random_tangent(const Subspace& f, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix g(f.ambient_dim(), f.dim());
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = normal(rng);
  }
  return g - f.basis() * (f.basis().transpose() * g);
}

std::optional<Subspace> orthogonal_subtraction(const Subspace& lstar, const Subspace& l) {
  if (lstar.ambient_dim() != l.ambient_dim()) {
    fail(ErrorKind::shape, "orthogonal subtraction needs a shared ambient dimension");
  }
  const Matrix cross = lstar.basis().transpose() * l.basis();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU);
  const Matrix principal = lstar.basis() * svd.matrixU();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < principal.cols(); ++i) {
    const Vector r = residual(l, principal.col(i));
    if (r.norm() >= kRankTol) keep.push_back(i);
  }
  if (keep.empty()) return std::nullopt;
  Matrix cols(lstar.ambient_dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) cols.col(j) = principal.col(keep[j]);
  return Subspace::from_spanning(cols);
}

Matrix orthogonal_complement(const Subspace& l) {
  const int big_d = l.ambient_dim();
  const int d = l.dim();
  if (big_d == 2 && d == 1) {
    Matrix n(2, 1);
    n << -l.basis()(1, 0), l.basis()(0, 0);
    return n;
  }
  Eigen::HouseholderQR<Matrix> qr(l.basis());
  const Matrix q = qr.householderQ();
  return q.rightCols(big_d - d);
}

Subspace random_subspace(int ambient_dim, int dim, Rng& rng) {
  if (dim < 1 || dim > ambient_dim) {
    fail(ErrorKind::shape, "random_subspace requires 1 <= d <= D");
  }
  std::normal_distribution<double> normal;
  Matrix g(ambient_dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r < ambient_dim; ++r) g(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(ambient_dim, dim);
  return Subspace(std::move(q));
}

SubspaceTuple random_tuple(std::size_t k, int ambient_dim, int dim, Rng& rng) {
  std::vector<Subspace> members;
  members.reserve(k);
  for (std::size_t i = 0; i < k; ++i) members.push_back(random_subspace(ambient_dim, dim, rng));
  return SubspaceTuple(std::move(members));
}

std::string to_text(const Subspace& s) {
  std::string out = std::to_string(s.ambient_dim()) + " " + std::to_string(s.dim());
  char buf[40];
  for (Eigen::Index c = 0; c < s.basis().cols(); ++c) {
    for (Eigen::Index r = 0; r < s.basis().rows(); ++r) {
      std::snprintf(buf, sizeof buf, " %.17g", s.basis()(r, c));
      out += buf;
    }
  }
  out += "\n";
  return out;
}

Subspace subspace_from_text(const std::string& text) {
  std::istringstream in(text);
  int big_d = 0;
  int d = 0;
  if (!(in >> big_d >> d) || big_d < 1 || d < 1 || d > big_d) {
    fail(ErrorKind::io, "malformed subspace header");
  }
  Matrix b(big_d, d);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < big_d; ++r) {
      if (!(in >> b(r, c))) fail(ErrorKind::io, "truncated subspace basis");
    }
  }
  return Subspace(std::move(b));
}

nlohmann::json to_json(const Subspace& s) {
  nlohmann::json basis = nlohmann::json::array();
  for (Eigen::Index c = 0; c < s.basis().cols(); ++c) {
    for (Eigen::Index r = 0; r < s.basis().rows(); ++r) basis.push_back(s.basis()(r, c));
  }
  return {{"D", s.ambient_dim()}, {"d", s.dim()}, {"basis", basis}};
}

Subspace subspace_from_json(const nlohmann::json& j) {
  try {
    const int big_d = j.at("D").get<int>();
    const int d = j.at("d").get<int>();
    const auto& basis = j.at("basis");
    if (big_d < 1 || d < 1 || d > big_d ||
        basis.size() != static_cast<std::size_t>(big_d) * static_cast<std::size_t>(d)) {
      fail(ErrorKind::config, "subspace basis has the wrong number of entries");
    }
    Matrix b(big_d, d);
    std::size_t k = 0;
    for (int c = 0; c < d; ++c) {
      for (int r = 0; r < big_d; ++r) b(r, c) = basis[k++].get<double>();
    }
    return Subspace(std::move(b));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, std::string("malformed subspace: ") + e.what());
  }
}

nlohmann::json to_json(const SubspaceTuple& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : t) out.push_back(to_json(s));
  return out;
}

SubspaceTuple tuple_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::config, "tuple must be a JSON array");
  std::vector<Subspace> members;
  for (const auto& item : j) members.push_back(subspace_from_json(item));
  return SubspaceTuple(std::move(members));
}

}  // namespace hlm
