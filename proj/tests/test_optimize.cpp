#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hlm/energy.hpp"
#include "hlm/model.hpp"
#include "hlm/optimize.hpp"

using namespace hlm;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Points exactly on two lines plus a few off-line points.
Matrix two_line_points(double a, double b, int per_line) {
  Matrix x(2 * per_line + 3, 2);
  for (int i = 0; i < per_line; ++i) {
    const double t = -1.0 + 2.0 * (i + 0.5) / per_line;
    x.row(2 * i) << t * std::cos(a), t * std::sin(a);
    x.row(2 * i + 1) << t * std::cos(b), t * std::sin(b);
  }
  x.row(2 * per_line) << 0.3, -0.4;
  x.row(2 * per_line + 1) << -0.2, 0.5;
  x.row(2 * per_line + 2) << 0.6, 0.6;
  return x;
}

}  // namespace

TEST_CASE("grid spec arithmetic") {
  const GridSpec g;
  CHECK(g.coarse_count() == 360);
  CHECK(g.coarse_step() == doctest::Approx(0.5 * kDeg));
  CHECK(g.final_resolution() == doctest::Approx(0.005 * kDeg));
  GridSpec bad;
  bad.levels = 5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = GridSpec{};
  bad.step = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("grid oracle finds lines through data at p = 1") {
  // Both lines sit on coarse grid nodes.
  const Matrix x = two_line_points(30 * kDeg, 80 * kDeg, 40);
  const OptResult r = grid_search_global(x, 2, 1.0, GridSpec{});
  const SubspaceTuple truth({Subspace::line(30 * kDeg), Subspace::line(80 * kDeg)});
  CHECK(recovery_distance(r.tuple, truth).distance < GridSpec{}.final_resolution());
  CHECK(r.energy <= energy_sum(x, truth, 1.0) + 1e-9);
}

TEST_CASE("grid oracle rejects unsupported shapes") {
  CHECK_THROWS_AS(grid_search_global(Matrix::Random(10, 3), 2, 1.0, GridSpec{}), Error);
  CHECK_THROWS_AS(grid_search_global(Matrix::Random(10, 2), 3, 1.0, GridSpec{}), Error);
}

TEST_CASE("line energy agrees with the generic energy") {
  const Matrix x = Matrix::Random(30, 2);
  const std::vector<double> angles{0.2, 2.0};
  const SubspaceTuple t({Subspace::line(0.2), Subspace::line(2.0)});
  for (double p : {0.5, 1.0, 2.0}) CHECK(line_energy(x, angles, p) == doctest::Approx(energy_sum(x, t, p)));
}

TEST_CASE("p = 2 single-subspace fit is PCA") {
  Rng rng(8);
  Matrix x = Matrix::Random(200, 3);
  x.col(2) *= 0.05;
  const Subspace s = fit_subspace_lp(x, 2, 2.0);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(x.transpose() * x);
  const Subspace pca(eig.eigenvectors().rightCols(2));
  CHECK(dist_grassmann(s, pca) < 1e-8);
}

TEST_CASE("l1 fit ignores a gross outlier that moves PCA") {
  // l1 energy 20 |sin t| + 5 |cos t|: global minimum at the x-axis, a kink
  // local minimum at the y-axis. Second moments: x 13.3, y 25.
  Matrix x(41, 2);
  for (int i = 0; i < 40; ++i) x.row(i) << -1.0 + i / 20.0, 0.0;
  x.row(40) << 0.0, 5.0;
  IrlsOptions opts;
  opts.init = Subspace::line(0.3);
  const Subspace l1 = fit_subspace_lp(x, 1, 1.0, opts);
  const Subspace l2 = fit_subspace_lp(x, 1, 2.0);
  CHECK(dist_grassmann(l1, Subspace::line(0.0)) < 1e-4);
  CHECK(dist_grassmann(l2, Subspace::line(0.0)) > 1.0);
}

TEST_CASE("k-flats energy history does not increase") {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix x = Matrix::Random(150, 3);
    for (double p : {0.7, 1.0, 2.0}) {
      const OptResult r = lp_kflats(x, 2, 1, p, derive_seed(12, rep));
      REQUIRE_FALSE(r.history.empty());
      for (std::size_t i = 1; i < r.history.size(); ++i) {
        CHECK(r.history[i] <= r.history[i - 1] * (1.0 + 1e-12) + 1e-15);
      }
      CHECK(r.energy == doctest::Approx(energy_sum(x, r.tuple, p)));
    }
  }
}

TEST_CASE("multi-restart is reproducible and keeps seeded starts") {
  const Matrix x = two_line_points(0.1, 1.0, 30);
  const SubspaceTuple truth({Subspace::line(0.1), Subspace::line(1.0)});
  const std::vector<SubspaceTuple> seeded{truth};
  const OptResult a = multi_restart(x, 2, 1, 1.0, 4, 77, seeded);
  const OptResult b = multi_restart(x, 2, 1, 1.0, 4, 77, seeded, {}, 2);
  CHECK(a.energy == b.energy);
  CHECK(a.energy <= energy_sum(x, truth, 1.0) + 1e-12);
}

TEST_CASE("local-min certificate separates a minimum from a tilted tuple") {
  const Matrix x = two_line_points(0.3, 1.4, 50);
  Rng rng(21);
  const SubspaceTuple truth({Subspace::line(0.3), Subspace::line(1.4)});
  CHECK(local_min_certificate(x, truth, 1.0, 64, 1e-3, rng).is_local_min);
  const SubspaceTuple tilted({Subspace::line(0.35), Subspace::line(1.4)});
  CHECK_FALSE(local_min_certificate(x, tilted, 1.0, 64, 1e-3, rng).is_local_min);
}

TEST_CASE("restricted fit on exact lines") {
  const Matrix x = two_line_points(0.3, 1.4, 50);
  const SubspaceTuple truth({Subspace::line(0.3), Subspace::line(1.4)});
  for (const RegionFit& f : restricted_best_fit_check(x, truth, 1.0)) {
    CHECK_FALSE(f.empty);
    CHECK(f.distance < 1e-4);
  }
}

TEST_CASE("optimizer result json round trip") {
  const OptResult r = lp_kflats(Matrix::Random(40, 2), 2, 1, 1.0, std::uint64_t{3});
  const OptResult back = opt_result_from_json(to_json(r));
  CHECK(back.energy == r.energy);
  CHECK(back.iterations == r.iterations);
  CHECK(recovery_distance(back.tuple, r.tuple).distance < 1e-12);
}
