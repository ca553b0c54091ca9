#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hlm/grassmann.hpp"

using namespace hlm;

namespace {

Subspace coordinate_span(int D, std::initializer_list<int> axes) {
  Matrix b = Matrix::Zero(D, static_cast<Eigen::Index>(axes.size()));
  int c = 0;
  for (int a : axes) b(a, c++) = 1.0;
  return Subspace(b);
}

}  // namespace

TEST_CASE("orthogonal planes in R^4") {
  const Subspace a = coordinate_span(4, {0, 1});
  const Subspace b = coordinate_span(4, {2, 3});
  const auto pa = principal_angles(a, b);
  REQUIRE(pa.angles.size() == 2);
  CHECK(pa.angles[0] == doctest::Approx(std::numbers::pi / 2));
  CHECK(pa.angles[1] == doctest::Approx(std::numbers::pi / 2));
  CHECK(dist_grassmann(a, b) == doctest::Approx(std::sqrt(2.0) * std::numbers::pi / 2));
  CHECK(dist_grassmann(a, a) == doctest::Approx(0.0));
}

TEST_CASE("lines in the plane") {
  CHECK(dist_grassmann(Subspace::line(0.1), Subspace::line(0.4)) == doctest::Approx(0.3));
  // Angle between lines wraps at pi.
  CHECK(dist_grassmann(Subspace::line(0.05), Subspace::line(std::numbers::pi - 0.05)) ==
        doctest::Approx(0.1));
}

TEST_CASE("small angles keep precision") {
  const double eps = 1e-9;
  CHECK(dist_grassmann(Subspace::line(0.7), Subspace::line(0.7 + eps)) ==
        doctest::Approx(eps).epsilon(1e-5));
}

TEST_CASE("bases are validated") {
  Matrix bad(2, 1);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS(Subspace{bad}, Error);
  Matrix dependent(3, 2);
  dependent << 1, 2, 0, 0, 0, 0;
  CHECK_THROWS_AS(Subspace::from_spanning(dependent), Error);
  CHECK_THROWS_AS(dist_grassmann(coordinate_span(3, {0}), coordinate_span(3, {0, 1})), Error);
}

TEST_CASE("from_spanning orthonormalizes") {
  Matrix v(3, 2);
  v << 1, 1, 0, 1, 0, 0;
  const Subspace s = Subspace::from_spanning(v);
  CHECK((s.basis().transpose() * s.basis() - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(dist_grassmann(s, coordinate_span(3, {0, 1})) == doctest::Approx(0.0));
}

TEST_CASE("recovery distance is an l-infinity distance up to permutation") {
  const SubspaceTuple a({Subspace::line(0.0), Subspace::line(1.0)});
  const SubspaceTuple b({Subspace::line(1.02), Subspace::line(0.05)});
  const Recovery r = recovery_distance(a, b);
  CHECK(r.distance == doctest::Approx(0.05));
  REQUIRE(r.permutation.size() == 2);
  CHECK(r.permutation[0] == 1);
  CHECK(r.permutation[1] == 0);
  CHECK(recovery_distance(a, a.permuted({1, 0})).distance == doctest::Approx(0.0));
}

TEST_CASE("point distances") {
  const Subspace l = Subspace::line(0.0);
  Vector x(2);
  x << 3.0, 4.0;
  CHECK(dist_point(l, x) == doctest::Approx(4.0));
  CHECK(project(l, x)(0) == doctest::Approx(3.0));
  CHECK(residual(l, x)(1) == doctest::Approx(4.0));
}

TEST_CASE("point distance is Lipschitz in the subspace") {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Subspace a = random_subspace(5, 2, rng);
    const Subspace b = random_subspace(5, 2, rng);
    Vector x = Vector::NullaryExpr(5, [&] { return std::normal_distribution<double>()(rng); });
    const double gap = std::abs(dist_point(a, x) - dist_point(b, x));
    CHECK(gap <= x.norm() * dist_grassmann(a, b) + 1e-12);
  }
}

TEST_CASE("geodesics are parametrized by arc length") {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const Subspace f = random_subspace(6, 2, rng);
    const Subspace g = random_subspace(6, 2, rng);
    const double total = dist_grassmann(f, g);
    CHECK(dist_grassmann(geodesic(f, g, 0.0), f) < 1e-7);
    CHECK(dist_grassmann(geodesic(f, g, total), g) < 1e-7);
    for (double frac : {0.25, 0.5, 0.8}) {
      const Subspace mid = geodesic(f, g, frac * total);
      CHECK(dist_grassmann(f, mid) == doctest::Approx(frac * total).epsilon(1e-7));
      CHECK(dist_grassmann(mid, g) == doctest::Approx((1.0 - frac) * total).epsilon(1e-7));
    }
  }
}

TEST_CASE("orthogonal complement and subtraction") {
  const Subspace l = coordinate_span(3, {0});
  const Matrix c = orthogonal_complement(l);
  CHECK(c.cols() == 2);
  CHECK((l.basis().transpose() * c).norm() < 1e-12);
  const Subspace plane = coordinate_span(3, {0, 1});
  const auto sub = orthogonal_subtraction(plane, l);
  REQUIRE(sub.has_value());
  CHECK(dist_grassmann(*sub, coordinate_span(3, {1})) == doctest::Approx(0.0));
}

TEST_CASE("text and json round trips") {
  Rng rng(1);
  const Subspace s = random_subspace(4, 2, rng);
  CHECK(dist_grassmann(subspace_from_text(to_text(s)), s) < 1e-12);
  CHECK(dist_grassmann(subspace_from_json(to_json(s)), s) < 1e-12);
  const SubspaceTuple t = random_tuple(3, 4, 2, rng);
  CHECK(recovery_distance(tuple_from_json(to_json(t)), t).distance < 1e-12);
}
