#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

#include "hlm/energy.hpp"
#include "hlm/experiments.hpp"

namespace hlm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// Same span, different basis.
Subspace rebased(const Subspace& s, Rng& rng) {
  const Subspace q = random_subspace(s.dim(), s.dim(), rng);
  return Subspace::from_spanning(s.basis() * q.basis());
}

Matrix random_points(std::size_t n, int dim, Rng& rng) {
  Matrix x(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) = uniform_ball_point(dim, rng).transpose();
  return x;
}

HLMModel two_line_model(double alpha0, double p) {
  HLMModel m;
  m.K = 2;
  m.D = 2;
  m.d = 1;
  m.truth = SubspaceTuple({Subspace::line(0.3), Subspace::line(0.3 + std::numbers::pi / 3.0)});
  m.alphas = {0.0, 0.5, 0.5};
  m.inliers.assign(2, InlierSpec{});
  m.noises.assign(2, NoiseSpec{});
  if (alpha0 < 0.0) {
    // Half of the exact-recovery threshold.
    const ConditionReport c = check_exact_recovery_condition(m, p);
    alpha0 = 0.5 * c.rhs;
  }
  return m.with_outlier_weight(alpha0);
}

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : seed_(seed) {}

  Rng rng() { return Rng(derive_seed(seed_, counter_++)); }

  void add(const std::string& module, const std::string& name, double margin,
           const std::string& detail) {
    report_.checks.push_back(PropertyCheck{name, module, margin >= 0.0, margin, detail});
  }

  void guard(const std::string& module, const std::string& name,
             const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      report_.checks.push_back(PropertyCheck{name, module, false, -kInf, std::string("error: ") + e.what()});
    }
  }

  PropertyReport take() { return std::move(report_); }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  PropertyReport report_;
};

void grassmann_properties(Suite& s) {
  s.guard("grassmann", "metric_axioms", [&] {
    Rng rng = s.rng();
    double sym = kInf;
    double tri = kInf;
    double zero = kInf;
    double sep = kInf;
    for (int i = 0; i < 1000; ++i) {
      const int big_d = uniform_int(rng, 2, 8);
      const int d = uniform_int(rng, 1, std::min(3, big_d - 1));
      const Subspace a = random_subspace(big_d, d, rng);
      const Subspace b = random_subspace(big_d, d, rng);
      const Subspace c = random_subspace(big_d, d, rng);
      const double ab = dist_grassmann(a, b);
      sym = std::min(sym, ab == dist_grassmann(b, a) ? 0.0 : -std::abs(ab - dist_grassmann(b, a)));
      tri = std::min(tri, ab + dist_grassmann(b, c) + 1e-9 - dist_grassmann(a, c));
      zero = std::min(zero, 1e-8 - dist_grassmann(a, rebased(a, rng)));
      sep = std::min(sep, ab - 1e-8);
    }
    s.add("grassmann", "metric_axioms", std::min({sym, tri, zero, sep}),
          fmt("1000 triples; triangle slack %.3g, identity slack %.3g", tri, zero));
  });

  s.guard("grassmann", "point_distance_lipschitz", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 10000; ++i) {
      const int big_d = uniform_int(rng, 2, 8);
      const int d = uniform_int(rng, 1, big_d - 1);
      const Subspace l1 = random_subspace(big_d, d, rng);
      const Subspace l2 = random_subspace(big_d, d, rng);
      const Vector x = uniform_ball_point(big_d, rng);
      const double lhs = std::abs(dist_point(l1, x) - dist_point(l2, x));
      margin = std::min(margin, x.norm() * dist_grassmann(l1, l2) + 1e-9 - lhs);
    }
    s.add("grassmann", "point_distance_lipschitz", margin, "10^4 random (x, L1, L2)");
  });

  s.guard("grassmann", "geodesic_arc_length", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    int pairs = 0;
    while (pairs < 100) {
      const int big_d = uniform_int(rng, 2, 8);
      const int d = uniform_int(rng, 1, std::min(3, big_d - 1));
      const Subspace f = random_subspace(big_d, d, rng);
      const Subspace g = random_subspace(big_d, d, rng);
      const PrincipalAngles pa = principal_angles(f, g);
      if (pa.angles.back() >= std::numbers::pi / 2 - 1e-6) continue;
      ++pairs;
      const double total = dist_grassmann(f, g);
      for (int k = 0; k < 10; ++k) {
        const double t = total * k / 9.0;
        margin = std::min(margin, 1e-8 - std::abs(dist_grassmann(f, geodesic(f, g, t)) - t));
      }
    }
    s.add("grassmann", "geodesic_arc_length", margin, "100 pairs x 10 parameters");
  });

  s.guard("grassmann", "recovery_distance_pseudometric", [&] {
    Rng rng = s.rng();
    double sym = kInf;
    double perm = kInf;
    double tri = kInf;
    for (int i = 0; i < 1000; ++i) {
      const int big_d = uniform_int(rng, 2, 5);
      const int d = uniform_int(rng, 1, big_d - 1);
      const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 1, 4));
      const SubspaceTuple a = random_tuple(k, big_d, d, rng);
      const SubspaceTuple b = random_tuple(k, big_d, d, rng);
      const SubspaceTuple c = random_tuple(k, big_d, d, rng);
      const double ab = recovery_distance(a, b).distance;
      sym = std::min(sym, ab == recovery_distance(b, a).distance ? 0.0 : -1.0);
      std::vector<std::size_t> order(k);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      perm = std::min(perm, 1e-12 - recovery_distance(a, a.permuted(order)).distance);
      tri = std::min(tri, ab + recovery_distance(b, c).distance + 1e-9 - recovery_distance(a, c).distance);
    }
    s.add("grassmann", "recovery_distance_pseudometric", std::min({sym, perm, tri}),
          fmt("1000 triples; triangle slack %.3g", tri));
  });
}

void model_properties(Suite& s) {
  s.guard("hlm-model", "psi_monotone", [&] {
    double margin = kInf;
    for (InlierKind kind : {InlierKind::uniform_ball, InlierKind::uniform_sphere}) {
      for (int d = 1; d <= 4; ++d) {
        for (double atom : {0.0, 0.3}) {
          const InlierSpec spec{kind, 0.8, atom};
          double prev = psi(spec, d, 0.0);
          for (int i = 1; i <= 1000; ++i) {
            const double v = psi(spec, d, 0.8 * i / 1000.0);
            margin = std::min(margin, v - prev);
            prev = v;
          }
          margin = std::min(margin, psi(spec, d, 1e-12) - atom);
        }
      }
    }
    s.add("hlm-model", "psi_monotone", margin, "ball and sphere, d = 1..4, atoms 0 and 0.3");
  });

  s.guard("hlm-model", "slab_energy_lower_bound", [&] {
    // Mean l_p energy of inliers of component 1 against tuples whose members
    // are all farther than eps from L*_1.
    struct Case {
      int big_d, d;
      double p;
    };
    double margin = kInf;
    double worst_z = kInf;
    Rng rng = s.rng();
    for (const Case cs : {Case{2, 1, 1.0}, Case{3, 1, 0.5}, Case{3, 2, 1.0}}) {
      HLMModel m;
      m.K = 2;
      m.D = cs.big_d;
      m.d = cs.d;
      m.truth = random_tuple(2, cs.big_d, cs.d, rng);
      m.alphas = {0.0, 0.5, 0.5};
      m.inliers.assign(2, InlierSpec{});
      m.noises.assign(2, NoiseSpec{});
      const double eps = 0.2;
      const double bound = tau0(m, cs.p) * std::pow(eps, cs.p);
      for (int t = 0; t < 4; ++t) {
        SubspaceTuple hat;
        do {
          hat = random_tuple(2, cs.big_d, cs.d, rng);
        } while (std::min(dist_grassmann(m.truth[0], hat[0]), dist_grassmann(m.truth[0], hat[1])) <= eps);
        const Matrix x = sample_inliers(m, 1, 100000, rng);
        const Matrix table = distance_table(x, hat);
        double sum = 0.0;
        double sq = 0.0;
        for (Eigen::Index i = 0; i < table.rows(); ++i) {
          const double e = std::pow(table.row(i).minCoeff(), cs.p);
          sum += e;
          sq += e * e;
        }
        const double n = static_cast<double>(table.rows());
        const double mean = sum / n;
        const double se = std::sqrt(std::max(0.0, sq / n - mean * mean) / n);
        margin = std::min(margin, mean + 3.0 * se - bound);
        worst_z = std::min(worst_z, (mean - bound) / se);
      }
    }
    s.add("hlm-model", "slab_energy_lower_bound", margin,
          fmt("12 tuples, 1e5 samples each; smallest (mean - tau0 eps^p)/se = %.3g", worst_z));
  });

  s.guard("hlm-model", "permutation_energy_gap", [&] {
    Rng rng = s.rng();
    const double p = 1.0;
    const HLMModel m = two_line_model(-1.0, p);
    const double coef = tau0(m, p) * m.min_inlier_weight() - m.alphas[0];
    double margin = kInf;
    for (int t = 0; t < 5; ++t) {
      const SubspaceTuple hat = SubspaceTuple({Subspace::line(0.3 + std::numbers::pi / 3.0 + uniform(rng, -0.1, 0.1)),
                                               Subspace::line(0.3 + uniform(rng, -0.1, 0.1))});
      const double d0 = recovery_distance(hat, m.truth).distance;
      const Dataset data = sample(m, 100000, rng, 0);
      const Matrix th = distance_table(data.points, hat);
      const Matrix tt = distance_table(data.points, m.truth);
      double sum = 0.0;
      double sq = 0.0;
      for (Eigen::Index i = 0; i < th.rows(); ++i) {
        const double diff = std::pow(th.row(i).minCoeff(), p) - std::pow(tt.row(i).minCoeff(), p);
        sum += diff;
        sq += diff * diff;
      }
      const double n = static_cast<double>(th.rows());
      const double gap = sum / n;
      const double se = std::sqrt(std::max(0.0, sq / n - gap * gap) / n);
      margin = std::min(margin, gap + 3.0 * se - coef * std::pow(d0, p));
    }
    s.add("hlm-model", "permutation_energy_gap", margin, "5 permuted perturbations, 1e5 samples each");
  });

  s.guard("hlm-model", "sample_determinism", [&] {
    const HLMModel m = two_line_model(0.2, 1.0).with_noise_level(0.01);
    const Dataset a = sample(m, 5000, 99);
    const Dataset b = sample(m, 5000, 99);
    const bool same = a.points == b.points && a.labels == b.labels;
    double support = kInf;
    for (Eigen::Index i = 0; i < a.points.rows(); ++i) {
      const Vector x = a.points.row(i).transpose();
      support = std::min(support, 1.0 + 0.01 * (1.0 + 1e-12) - x.norm());
      const int label = a.labels[static_cast<std::size_t>(i)];
      if (label > 0) support = std::min(support, 0.01 * (1.0 + 1e-12) - dist_point(m.truth[label - 1], x));
    }
    s.add("hlm-model", "sample_determinism", same ? support : -1.0,
          "same seed twice, bitwise; support and label invariants");
  });
}

void energy_properties(Suite& s) {
  s.guard("energy", "homogeneity", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 1000; ++i) {
      const int big_d = uniform_int(rng, 2, 6);
      const int d = uniform_int(rng, 1, big_d - 1);
      const SubspaceTuple t = random_tuple(static_cast<std::size_t>(uniform_int(rng, 1, 3)), big_d, d, rng);
      const Vector x = uniform_ball_point(big_d, rng);
      const double c = uniform(rng, 0.0, 2.0);
      const double p = std::array<double, 5>{0.5, 1.0, 1.5, 2.0, 3.0}[static_cast<std::size_t>(uniform_int(rng, 0, 4))];
      const double lhs = point_energy(c * x, t, p);
      const double rhs = std::pow(c, p) * point_energy(x, t, p);
      margin = std::min(margin, 1e-12 * std::max(1.0, std::abs(rhs)) - std::abs(lhs - rhs));
    }
    s.add("energy", "homogeneity", margin, "1000 random (x, tuple, c, p)");
  });

  s.guard("energy", "voronoi_decomposition", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 50; ++i) {
      const int big_d = uniform_int(rng, 2, 5);
      const int d = uniform_int(rng, 1, big_d - 1);
      const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 1, 4));
      const SubspaceTuple t = random_tuple(k, big_d, d, rng);
      const Matrix x = random_points(200, big_d, rng);
      const double p = uniform(rng, 0.3, 3.0);
      const VoronoiAssignment v = voronoi_labels(x, t);
      double split = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          if (v.labels[static_cast<std::size_t>(r)] == static_cast<int>(j)) {
            split += std::pow(dist_point(t[j - 1], x.row(r).transpose()), p);
          }
        }
      }
      const double total = dataset_energy(x, t, p).sum;
      margin = std::min(margin, 1e-9 * std::max(total, 1e-300) - std::abs(total - split));
    }
    s.add("energy", "voronoi_decomposition", margin, "50 datasets of 200 points");
  });

  s.guard("energy", "d_matrix_spaces", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 1000; ++i) {
      const int big_d = uniform_int(rng, 2, 6);
      const int d = uniform_int(rng, 1, big_d - 1);
      const Subspace l = random_subspace(big_d, d, rng);
      const Vector x = uniform_ball_point(big_d, rng);
      const double p = std::array<double, 3>{1.0, 2.0, 3.0}[static_cast<std::size_t>(i % 3)];
      const Matrix dm = d_matrix(l, x, p);
      const Matrix proj = l.projector();
      const Matrix perp = Matrix::Identity(big_d, big_d) - proj;
      const double scale = std::max(1.0, dm.norm());
      margin = std::min(margin, 1e-12 * scale - (perp * dm).norm());
      margin = std::min(margin, 1e-12 * scale - (dm * proj).norm());
    }
    s.add("energy", "d_matrix_spaces", margin, "P_perp D = 0 and D P_L = 0");
  });

  s.guard("energy", "symmetrized_residual_zero", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 30; ++i) {
      const int big_d = uniform_int(rng, 2, 5);
      const int d = uniform_int(rng, 1, big_d - 1);
      const Subspace l = random_subspace(big_d, d, rng);
      const Matrix half = random_points(100, big_d, rng);
      const Matrix proj = l.projector();
      const Matrix mirrored = half * (2.0 * proj - Matrix::Identity(big_d, big_d));
      Matrix x(200, big_d);
      x << half, mirrored;
      for (double p : {1.0, 2.0, 3.0}) {
        const FirstOrderResidual res = first_order_residual(x, SubspaceTuple({l}), 1, p);
        margin = std::min(margin, 1e-12 - res.frobenius);
      }
    }
    s.add("energy", "symmetrized_residual_zero", margin, "30 mirrored datasets, p = 1, 2, 3");
  });

  s.guard("energy", "rotation_gradient", [&] {
    // d/dt E(exp(t W) L) at 0 equals -2 N <W, mean(D)^T> for skew W, p = 2.
    Rng rng = s.rng();
    double worst_small = 0.0;
    double worst_ratio_dev = 0.0;
    double margin = kInf;
    for (int i = 0; i < 10; ++i) {
      const int big_d = 4;
      const int d = 2;
      const Subspace l = random_subspace(big_d, d, rng);
      const Matrix x = random_points(200, big_d, rng);
      Matrix w = Matrix::Random(big_d, big_d);
      std::normal_distribution<double> normal;
      for (Eigen::Index a = 0; a < w.rows(); ++a) {
        for (Eigen::Index b = 0; b < w.cols(); ++b) w(a, b) = normal(rng);
      }
      w = (w - w.transpose()).eval();
      w /= w.norm();
      Matrix mean = Matrix::Zero(big_d, big_d);
      for (Eigen::Index r = 0; r < x.rows(); ++r) mean += d_matrix(l, x.row(r).transpose(), 2.0);
      mean /= static_cast<double>(x.rows());
      const double n = static_cast<double>(x.rows());
      const double analytic = -2.0 * n * (w.array() * mean.transpose().array()).sum();
      const double e0 = energy_sum(x, SubspaceTuple({l}), 2.0);
      double err[2];
      int k = 0;
      for (double h : {1e-4, 1e-5}) {
        const Matrix rot = (h * w).exp();
        const Subspace moved = Subspace::from_spanning(rot * l.basis());
        const double fd = (energy_sum(x, SubspaceTuple({moved}), 2.0) - e0) / h;
        err[k++] = std::abs(fd - analytic) / n;
      }
      worst_small = std::max(worst_small, err[1]);
      const double ratio = err[0] / std::max(err[1], 1e-300);
      worst_ratio_dev = std::max(worst_ratio_dev, std::abs(std::log10(ratio) - 1.0));
      margin = std::min({margin, 1e-5 - err[1], 0.3 - std::abs(std::log10(ratio) - 1.0)});
    }
    s.add("energy", "rotation_gradient", margin,
          fmt("per-point error at h=1e-5: %.3g; |log10(err ratio) - 1| <= %.3g", worst_small, worst_ratio_dev));
  });
}

void optimize_properties(Suite& s) {
  s.guard("optimize", "monotone_descent", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 20; ++i) {
      const int big_d = uniform_int(rng, 2, 3);
      const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 2, 3));
      const double p = std::array<double, 4>{0.5, 1.0, 1.5, 2.0}[static_cast<std::size_t>(i % 4)];
      const Matrix x = random_points(150, big_d, rng);
      const OptResult r = lp_kflats(x, k, 1, p, rng());
      for (std::size_t j = 1; j < r.history.size(); ++j) {
        margin = std::min(margin, r.history[j - 1] - r.history[j]);
      }
    }
    s.add("optimize", "monotone_descent", margin, "20 random instances");
  });

  s.guard("optimize", "grid_oracle_known_optimum", [&] {
    Rng rng = s.rng();
    const GridSpec grid;
    double margin = kInf;
    {
      Matrix x(400, 2);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x.row(i) = (Subspace::line(0.7).basis() * uniform(rng, -1.0, 1.0)).transpose();
      }
      const OptResult r = grid_search_global(x, 1, 1.0, grid);
      margin = std::min(margin, grid.final_resolution() - recovery_distance(r.tuple, SubspaceTuple({Subspace::line(0.7)})).distance);
    }
    {
      const SubspaceTuple cross({Subspace::line(std::numbers::pi / 4 + 0.1), Subspace::line(-std::numbers::pi / 4 + 0.1)});
      Matrix x(400, 2);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x.row(i) = (cross[static_cast<std::size_t>(i % 2)].basis() * uniform(rng, -1.0, 1.0)).transpose();
      }
      for (double p : {0.5, 1.0, 2.0}) {
        const OptResult r = grid_search_global(x, 2, p, grid);
        margin = std::min(margin, grid.final_resolution() - recovery_distance(r.tuple, cross).distance);
      }
    }
    s.add("optimize", "grid_oracle_known_optimum", margin, "clean line and symmetric cross");
  });

  s.guard("optimize", "init_permutation_invariance", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 10; ++i) {
      const Matrix x = random_points(200, 3, rng);
      const SubspaceTuple init = random_tuple(3, 3, 1, rng);
      const double p = i % 2 ? 1.0 : 2.0;
      const double e1 = lp_kflats(x, 3, 1, p, init).energy;
      const double e2 = lp_kflats(x, 3, 1, p, init.permuted({2, 0, 1})).energy;
      margin = std::min(margin, 1e-9 * std::max(1.0, e1) - std::abs(e1 - e2));
    }
    s.add("optimize", "init_permutation_invariance", margin, "10 instances, cyclic permutation");
  });

  s.guard("optimize", "fixed_point_first_order", [&] {
    Rng rng = s.rng();
    double margin = kInf;
    for (int i = 0; i < 10; ++i) {
      const HLMModel m = two_line_model(0.2, 1.0);
      const Dataset data = sample(m, 500, rng, 0);
      const double p = i % 2 ? 2.0 : 3.0;
      const OptResult r = lp_kflats(data.points, 2, 1, p, m.truth);
      const double scale = std::pow(data.points.rowwise().norm().mean(), p - 1.0);
      for (std::size_t j = 1; j <= 2; ++j) {
        const FirstOrderResidual res = first_order_residual(data.points, r.tuple, j, p);
        if (!res.empty_region) margin = std::min(margin, 1e-3 * scale - res.frobenius);
      }
    }
    s.add("optimize", "fixed_point_first_order", margin, "10 fixed points, p = 2 and 3");
  });
}

void experiment_properties(Suite& s, std::uint64_t seed) {
  s.guard("experiments", "sweep_determinism", [&] {
    ExperimentConfig c;
    c.model = two_line_model(0.1, 1.0);
    c.K = 2;
    c.D = 2;
    c.d = 1;
    c.p_values = {1.0, 2.0};
    c.n_values = {300};
    c.trials = 3;
    c.grid.step = 2.0 * std::numbers::pi / 180.0;
    c.grid.levels = 1;
    c.seed = seed;
    const std::string a = results_csv(phase_transition_sweep(c, 1).rows);
    const std::string b = results_csv(phase_transition_sweep(c, 2).rows);
    s.add("experiments", "sweep_determinism", a == b ? 0.0 : -1.0, "1 and 2 workers, byte comparison");
  });

  s.guard("experiments", "truth_seeded_energy_sanity", [&] {
    ExperimentConfig c;
    HLMModel m;
    Rng rng = s.rng();
    m.K = 2;
    m.D = 3;
    m.d = 1;
    m.truth = random_tuple(2, 3, 1, rng);
    m.alphas = {0.2, 0.4, 0.4};
    m.inliers.assign(2, InlierSpec{});
    m.noises.assign(2, NoiseSpec{NoiseKind::uniform_slab, 0.02, 0.5, 0.0});
    c.model = m;
    c.K = 2;
    c.D = 3;
    c.d = 1;
    c.n_values = {300};
    c.trials = 4;
    c.restarts = 3;
    c.seed = seed;
    double margin = kInf;
    for (const auto& r : phase_transition_sweep(c).rows) {
      margin = std::min(margin, r.energy_truth + 1e-12 - r.energy_found);
    }
    s.add("experiments", "truth_seeded_energy_sanity", margin, "found <= truth + 1e-12 with truth among the starts");
  });

  s.guard("experiments", "aggregates_recompute", [&] {
    ExperimentConfig c;
    c.model = two_line_model(0.3, 1.0);
    c.K = 2;
    c.D = 2;
    c.d = 1;
    c.p_values = {1.0, 2.0};
    c.n_values = {200, 400};
    c.trials = 3;
    c.grid.step = 2.0 * std::numbers::pi / 180.0;
    c.grid.levels = 1;
    c.seed = seed;
    const SweepResult r = phase_transition_sweep(c);
    double margin = 0.0;
    for (const auto& cell : r.cells) {
      std::size_t trials = 0;
      std::size_t wins = 0;
      double sum = 0.0;
      for (const auto& row : r.rows) {
        if (row.cell.p == cell.cell.p && row.cell.n == cell.cell.n) {
          ++trials;
          wins += row.success ? 1 : 0;
          sum += row.recovery_dist;
        }
      }
      if (trials != cell.trials || wins != cell.successes ||
          std::abs(sum / static_cast<double>(trials) - cell.mean_dist) > 1e-15) {
        margin = -1.0;
      }
    }
    s.add("experiments", "aggregates_recompute", margin, "4 cells x 3 trials");
  });
}

void cli_properties(Suite& s) {
  s.guard("cli", "config_round_trip", [&] {
    Rng rng = s.rng();
    std::vector<HLMModel> models;
    for (const auto& name : scenario_names()) models.push_back(scenario(name, nlohmann::json::object(), rng));
    HLMModel m;
    m.K = 3;
    m.D = 4;
    m.d = 2;
    m.truth = random_tuple(3, 4, 2, rng);
    m.alphas = {0.1, 0.3, 0.3, 0.3};
    m.inliers = {InlierSpec{InlierKind::uniform_ball, 1.0, 0.0}, InlierSpec{InlierKind::uniform_sphere, 0.7, 0.1},
                 InlierSpec{InlierKind::uniform_ball, 0.5, 0.0}};
    m.noises = {NoiseSpec{NoiseKind::none, 0.0, 0.5, 0.0}, NoiseSpec{NoiseKind::uniform_orthogonal_ball, 0.05, 0.5, 0.0},
                NoiseSpec{NoiseKind::uniform_slab, 0.01, 0.5, 0.0}};
    models.push_back(m);
    double margin = 0.0;
    for (const auto& model : models) {
      const HLMModel back = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
      if (!(back == model)) margin = -1.0;
    }
    s.add("cli", "config_round_trip", margin, "4 scenarios and a mixed D=4 model");
  });
}

}  // namespace

bool PropertyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

nlohmann::json PropertyReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : checks) {
    list.push_back({{"module", c.module},
                    {"name", c.name},
                    {"passed", c.passed},
                    {"margin", std::isfinite(c.margin) ? nlohmann::json(c.margin) : nlohmann::json()},
                    {"detail", c.detail}});
  }
  return {{"all_passed", all_passed()}, {"checks", list}};
}

PropertyReport property_suite(std::uint64_t seed) {
  Suite s(seed);
  grassmann_properties(s);
  model_properties(s);
  energy_properties(s);
  optimize_properties(s);
  experiment_properties(s, seed);
  cli_properties(s);
  return s.take();
}

}  // namespace hlm
