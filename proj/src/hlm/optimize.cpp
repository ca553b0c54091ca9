#include "hlm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "hlm/energy.hpp"

namespace hlm {

namespace {

double lp(double dist, double p) {
  if (p == 1.0) return dist;
  if (p == 2.0) return dist * dist;
  return std::pow(dist, p);
}

double median_norm(const Matrix& points) {
  std::vector<double> norms(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) norms[static_cast<std::size_t>(i)] = points.row(i).norm();
  if (norms.empty()) return 0.0;
  auto mid = norms.begin() + static_cast<std::ptrdiff_t>(norms.size() / 2);
  std::nth_element(norms.begin(), mid, norms.end());
  return *mid;
}

double subspace_energy(const Matrix& points, const Subspace& l, double p) {
  const Matrix& b = l.basis();
  const Vector dist = (points - (points * b) * b.transpose()).rowwise().norm();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < dist.size(); ++i) sum += lp(dist(i), p);
  return sum;
}

Matrix rows_of(const Matrix& points, const std::vector<Eigen::Index>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), points.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = points.row(idx[r]);
  return out;
}

// Fills a subspace from spanning candidates, padding with random directions
// when they are rank deficient.
Subspace span_or_pad(const Matrix& vectors, int d, Rng& rng) {
  const int big_d = static_cast<int>(vectors.rows());
  Matrix cols(big_d, d);
  int filled = 0;
  auto try_add = [&](Vector v) {
    if (filled > 0) v -= cols.leftCols(filled) * (cols.leftCols(filled).transpose() * v);
    const double n = v.norm();
    if (n > kRankTol) {
      cols.col(filled++) = v / n;
    }
  };
  for (Eigen::Index c = 0; c < vectors.cols() && filled < d; ++c) {
    const Vector v = vectors.col(c);
    if (v.norm() > 0.0) try_add(v / v.norm());
  }
  std::normal_distribution<double> normal;
  while (filled < d) {
    Vector v(big_d);
    for (int i = 0; i < big_d; ++i) v(i) = normal(rng);
    try_add(v);
  }
  return Subspace::from_spanning(cols);
}

double wrap_angle(double theta) {
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  return t;
}

// r^p for every (angle, point) pair: out[a * n + i].
void line_table(const Matrix& points, Eigen::Index begin, Eigen::Index count,
                std::span<const double> angles, double p, std::vector<double>& out) {
  const std::size_t n = static_cast<std::size_t>(count);
  out.resize(angles.size() * n);
  for (std::size_t a = 0; a < angles.size(); ++a) {
    const double c = std::cos(angles[a]);
    const double s = std::sin(angles[a]);
    double* row = out.data() + a * n;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Index r = begin + static_cast<Eigen::Index>(i);
      row[i] = lp(std::abs(c * points(r, 1) - s * points(r, 0)), p);
    }
  }
}

double pair_sum(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::min(a[i], b[i]);
  return sum;
}

struct GridPoint {
  std::vector<double> angles;
  double energy = 0.0;
};

// Local window search around `center` at step h with +-kGridRefineFactor
// offsets per coordinate.
GridPoint refine_window(const Matrix& points, const GridPoint& center, double h, double p) {
  const int half = kGridRefineFactor;
  const std::size_t width = 2 * static_cast<std::size_t>(half) + 1;
  const std::size_t k = center.angles.size();
  std::vector<std::vector<double>> offsets(k);
  std::vector<std::vector<double>> tables(k);
  for (std::size_t c = 0; c < k; ++c) {
    for (int o = -half; o <= half; ++o) offsets[c].push_back(wrap_angle(center.angles[c] + o * h));
    line_table(points, 0, points.rows(), offsets[c], p, tables[c]);
  }
  const std::size_t n = static_cast<std::size_t>(points.rows());
  GridPoint best = center;
  best.energy = std::numeric_limits<double>::infinity();
  if (k == 1) {
    for (std::size_t a = 0; a < width; ++a) {
      const double* row = tables[0].data() + a * n;
      const double e = std::accumulate(row, row + n, 0.0);
      if (e < best.energy) best = {{offsets[0][a]}, e};
    }
  } else {
    for (std::size_t a = 0; a < width; ++a) {
      for (std::size_t b = 0; b < width; ++b) {
        const double e = pair_sum(tables[0].data() + a * n, tables[1].data() + b * n, n);
        if (e < best.energy) best = {{offsets[0][a], offsets[1][b]}, e};
      }
    }
  }
  return best;
}

}  // namespace

nlohmann::json to_json(const OptResult& r) {
  return {{"tuple", to_json(r.tuple)},
          {"energy", r.energy},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"history", r.history},
          {"restarts_used", r.restarts_used}};
}

OptResult opt_result_from_json(const nlohmann::json& j) {
  try {
    OptResult r;
    r.tuple = tuple_from_json(j.at("tuple"));
    r.energy = j.at("energy").get<double>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.converged = j.at("converged").get<bool>();
    r.history = j.at("history").get<std::vector<double>>();
    r.restarts_used = j.at("restarts_used").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, std::string("malformed OptResult: ") + e.what());
  }
}

void GridSpec::validate() const {
  if (!(step > 0.0) || step > std::numbers::pi / 8 + 1e-15) {
    fail(ErrorKind::config, "grid step must lie in (0, pi/8]");
  }
  if (levels < 0 || levels > 4) fail(ErrorKind::config, "grid levels must lie in [0, 4]");
}

std::size_t GridSpec::coarse_count() const {
  return static_cast<std::size_t>(std::ceil(std::numbers::pi / step - 1e-9));
}

double GridSpec::coarse_step() const {
  return std::numbers::pi / static_cast<double>(coarse_count());
}

double GridSpec::final_resolution() const {
  return coarse_step() / std::pow(static_cast<double>(kGridRefineFactor), levels);
}

Subspace weighted_principal_subspace(const Matrix& points, const Vector& weights, int d) {
  const Matrix weighted = points.array().colwise() * weights.array();
  const Matrix scatter = points.transpose() * weighted;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
  const Eigen::Index big_d = points.cols();
  Matrix basis(big_d, d);
  // Eigenvalues ascend; take the top d, largest first.
  for (int c = 0; c < d; ++c) basis.col(c) = eig.eigenvectors().col(big_d - 1 - c);
  return Subspace::from_spanning(basis);
}

namespace {

// Riemannian gradient of sum dist^p: -p sum r^(p-2) P_perp(x) (B^T x)^T.
Matrix energy_gradient(const Matrix& points, const Subspace& l, double p) {
  const Matrix& b = l.basis();
  const Matrix coords = points * b;
  const Matrix perp = points - coords * b.transpose();
  const Vector r = perp.rowwise().norm();
  Vector w(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) w(i) = std::pow(r(i), p - 2.0);
  return -p * (perp.array().colwise() * w.array()).matrix().transpose() * coords;
}

// Backtracking descent along geodesics. IRLS is not a majorization for
// p > 2 and can stall away from the stationary point.
Subspace polish_gradient(const Matrix& points, Subspace current, double p, int max_iter) {
  double energy = subspace_energy(points, current, p);
  double step = 1e-2;
  for (int it = 0; it < 20 * max_iter; ++it) {
    const Matrix grad = energy_gradient(points, current, p);
    const double norm = grad.norm();
    if (norm <= 1e-13 * std::max(energy, 1e-300)) break;
    const Matrix dir = -grad / norm;
    bool moved = false;
    while (step > 1e-16) {
      Subspace next = geodesic_along(current, dir, step);
      const double e = subspace_energy(points, next, p);
      if (e <= energy - 1e-4 * step * norm) {
        current = std::move(next);
        energy = e;
        step = std::min(2.0 * step, 0.5);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return current;
}

}  // namespace

Subspace fit_subspace_lp(const Matrix& points, int d, double p, const IrlsOptions& opts) {
  EnergyParams params(p);
  if (d < 1 || d > points.cols()) fail(ErrorKind::shape, "subspace dimension out of range");
  if (points.rows() < d) {
    fail(ErrorKind::shape, "rank error: need at least d = " + std::to_string(d) +
                               " points, got " + std::to_string(points.rows()));
  }
  if (opts.init && opts.init->ambient_dim() != points.cols()) {
    fail(ErrorKind::shape, "initial subspace has the wrong ambient dimension");
  }
  const Vector ones = Vector::Ones(points.rows());
  const Subspace pca = weighted_principal_subspace(points, ones, d);

  Subspace current = opts.init ? *opts.init : pca;
  Subspace best = current;
  double best_energy = subspace_energy(points, current, p);
  if (opts.init && p == 2.0) {
    const double e = subspace_energy(points, pca, p);
    if (e < best_energy) {
      best = pca;
      best_energy = e;
    }
    return best;
  }
  if (p == 2.0) return pca;

  const double delta = 1e-8 * std::max(median_norm(points), 1e-300);
  for (int it = 0; it < opts.max_iter; ++it) {
    const Matrix& b = current.basis();
    const Vector dist = (points - (points * b) * b.transpose()).rowwise().norm();
    Vector w(dist.size());
    for (Eigen::Index i = 0; i < dist.size(); ++i) {
      w(i) = std::pow(dist(i) * dist(i) + delta * delta, (p - 2.0) / 2.0);
    }
    Subspace next = weighted_principal_subspace(points, w, d);
    const double e = subspace_energy(points, next, p);
    if (e < best_energy) {
      best = next;
      best_energy = e;
    }
    const double move = dist_grassmann(current, next);
    current = std::move(next);
    if (move < opts.tol) break;
  }
  if (p > 2.0) best = polish_gradient(points, best, p, opts.max_iter);
  return best;
}

SubspaceTuple farthest_point_init(const Matrix& points, std::size_t k, int d) {
  const Eigen::Index n = points.rows();
  if (n == 0) fail(ErrorKind::empty, "farthest_point_init needs points");
  Rng pad(kDefaultSeed);
  std::vector<Subspace> chosen;
  Vector worst_fit = points.rowwise().norm();
  const std::size_t group =
      std::max<std::size_t>(static_cast<std::size_t>(d), static_cast<std::size_t>(n) / (4 * k));
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::Index far = 0;
    worst_fit.maxCoeff(&far);
    const Vector anchor = points.row(far).transpose();
    const double anchor_norm = anchor.norm();
    Subspace next = random_subspace(static_cast<int>(points.cols()), d, pad);
    if (anchor_norm > 0.0) {
      // Points ranked by |cos| with the anchor direction.
      std::vector<std::pair<double, Eigen::Index>> ranked;
      ranked.reserve(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = points.row(i).norm();
        const double c = norm > 0.0 ? std::abs(points.row(i).dot(anchor)) / (norm * anchor_norm) : 0.0;
        ranked.emplace_back(-c, i);
      }
      const std::size_t take = std::min(group, ranked.size());
      std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end());
      std::vector<Eigen::Index> idx;
      for (std::size_t r = 0; r < take; ++r) idx.push_back(ranked[r].second);
      const Matrix sub = rows_of(points, idx);
      if (d == 1) {
        next = Subspace::from_spanning(anchor);
      } else {
        next = span_or_pad(weighted_principal_subspace(sub, Vector::Ones(sub.rows()), d).basis(), d, pad);
      }
    }
    chosen.push_back(next);
    const Matrix& b = next.basis();
    const Vector dist = (points - (points * b) * b.transpose()).rowwise().norm();
    worst_fit = worst_fit.cwiseMin(dist);
  }
  return SubspaceTuple(std::move(chosen));
}

OptResult lp_kflats(const Matrix& points, std::size_t k, int d, double p,
                    const SubspaceTuple& init, const KFlatsOptions& opts) {
  EnergyParams params(p);
  if (k < 1) fail(ErrorKind::shape, "K must be positive");
  if (init.size() != k || init.ambient_dim() != points.cols() || init.dim() != d) {
    fail(ErrorKind::shape, "initial tuple does not match (K, D, d)");
  }
  if (points.rows() < static_cast<Eigen::Index>(k) * d) {
    fail(ErrorKind::shape, "lp_kflats needs N >= K*d points");
  }
  Rng pad(opts.seed);
  const double n = static_cast<double>(points.rows());
  const double floor = n * std::pow(1e-14, p);

  OptResult out;
  out.tuple = init;
  out.energy = energy_sum(points, init, p);
  out.history.push_back(out.energy);
  if (out.energy <= floor) {
    out.converged = true;
    return out;
  }
  for (int it = 0; it < opts.max_iter; ++it) {
    const Matrix table = distance_table(points, out.tuple);
    const VoronoiAssignment assign = voronoi_labels(points, out.tuple);
    std::vector<std::vector<Eigen::Index>> members(k);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      members[static_cast<std::size_t>(assign.labels[static_cast<std::size_t>(i)] - 1)].push_back(i);
    }
    // Worst-fit order for re-seeding empty clusters.
    std::vector<Eigen::Index> worst(static_cast<std::size_t>(points.rows()));
    std::iota(worst.begin(), worst.end(), 0);
    std::stable_sort(worst.begin(), worst.end(), [&](Eigen::Index a, Eigen::Index b) {
      return table.row(a).minCoeff() > table.row(b).minCoeff();
    });
    std::size_t next_worst = 0;

    std::vector<Subspace> next;
    next.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      if (members[j].empty()) {
        Matrix seeds(points.cols(), d);
        for (int c = 0; c < d; ++c) {
          seeds.col(c) = points.row(worst[std::min(next_worst++, worst.size() - 1)]).transpose();
        }
        next.push_back(span_or_pad(seeds, d, pad));
      } else if (members[j].size() < static_cast<std::size_t>(d)) {
        next.push_back(out.tuple[j]);
      } else {
        IrlsOptions irls;
        irls.init = out.tuple[j];
        next.push_back(fit_subspace_lp(rows_of(points, members[j]), d, p, irls));
      }
    }
    SubspaceTuple candidate(std::move(next));
    const double e = energy_sum(points, candidate, p);
    ++out.iterations;
    if (e > out.energy) {
      // Rounding-level increase; keep the previous tuple.
      out.converged = true;
      out.history.push_back(out.energy);
      break;
    }
    const double previous = out.energy;
    out.tuple = std::move(candidate);
    out.energy = e;
    out.history.push_back(e);
    if (previous - e <= opts.tol * previous || e <= floor) {
      out.converged = true;
      break;
    }
  }
  return out;
}

OptResult lp_kflats(const Matrix& points, std::size_t k, int d, double p,
                    std::uint64_t init_seed, const KFlatsOptions& opts) {
  Rng rng(init_seed);
  return lp_kflats(points, k, d, p, random_tuple(k, static_cast<int>(points.cols()), d, rng), opts);
}

OptResult multi_restart(const Matrix& points, std::size_t k, int d, double p,
                        std::size_t n_restarts, std::uint64_t seed,
                        std::span<const SubspaceTuple> seeded, const KFlatsOptions& opts,
                        int workers) {
  if (n_restarts < 1) fail(ErrorKind::domain, "n_restarts must be at least 1");
  const int big_d = static_cast<int>(points.cols());
  std::vector<SubspaceTuple> starts(seeded.begin(), seeded.end());
  starts.push_back(farthest_point_init(points, k, d));
  for (std::size_t r = 0; r < n_restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    starts.push_back(random_tuple(k, big_d, d, rng));
  }
  std::vector<OptResult> runs(starts.size());
  parallel_for(starts.size(), workers, [&](std::size_t i) {
    KFlatsOptions run_opts = opts;
    run_opts.seed = derive_seed(seed ^ 0xA5A5A5A5A5A5A5A5ull, i);
    runs[i] = lp_kflats(points, k, d, p, starts[i], run_opts);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].energy < runs[best].energy) best = i;
  }
  OptResult out = std::move(runs[best]);
  out.restarts_used = starts.size();
  return out;
}

double line_energy(const Matrix& points, std::span<const double> angles, double p) {
  if (points.cols() != 2) fail(ErrorKind::shape, "line_energy needs points in R^2");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (double a : angles) {
      best = std::min(best, std::abs(std::cos(a) * points(i, 1) - std::sin(a) * points(i, 0)));
    }
    sum += lp(best, p);
  }
  return sum;
}

OptResult grid_search_global(const Matrix& points, std::size_t k, double p,
                             const GridSpec& spec, int workers) {
  EnergyParams params(p);
  if (points.cols() != 2 || (k != 1 && k != 2)) {
    fail(ErrorKind::capability, "grid oracle supports only D = 2, d = 1, K in {1, 2} (got D = " +
                                    std::to_string(points.cols()) + ", K = " + std::to_string(k) + ")");
  }
  if (points.rows() == 0) fail(ErrorKind::empty, "grid oracle needs points");
  spec.validate();
  const std::size_t m = spec.coarse_count();
  const double h = spec.coarse_step();
  std::vector<double> angles(m);
  for (std::size_t a = 0; a < m; ++a) angles[a] = static_cast<double>(a) * h;

  // Coarse pass, chunked over points; chunk partials merge in chunk order.
  constexpr Eigen::Index kChunk = 2048;
  const Eigen::Index n = points.rows();
  const std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  const std::size_t cells = k == 1 ? m : m * (m - 1) / 2;
  std::vector<std::vector<double>> partial(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index count = std::min(kChunk, n - begin);
    const std::size_t cn = static_cast<std::size_t>(count);
    std::vector<double> table;
    line_table(points, begin, count, angles, params.p, table);
    std::vector<double>& acc = partial[c];
    acc.assign(cells, 0.0);
    if (k == 1) {
      for (std::size_t a = 0; a < m; ++a) {
        const double* row = table.data() + a * cn;
        acc[a] = std::accumulate(row, row + cn, 0.0);
      }
    } else {
      std::size_t cell = 0;
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
          acc[cell++] = pair_sum(table.data() + a * cn, table.data() + b * cn, cn);
        }
      }
    }
  });
  std::vector<double> coarse(cells, 0.0);
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i < cells; ++i) coarse[i] += acc[i];
  }

  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(kGridCandidates, cells);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return coarse[a] < coarse[b] || (coarse[a] == coarse[b] && a < b);
                    });
  std::vector<std::pair<std::size_t, std::size_t>> pair_of;
  if (k == 2) {
    pair_of.reserve(cells);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) pair_of.emplace_back(a, b);
    }
  }

  GridPoint best;
  best.energy = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < take; ++c) {
    GridPoint g;
    if (k == 1) {
      g.angles = {angles[order[c]]};
    } else {
      g.angles = {angles[pair_of[order[c]].first], angles[pair_of[order[c]].second]};
    }
    g.energy = coarse[order[c]];
    double step = h;
    for (int level = 1; level <= spec.levels; ++level) {
      step /= kGridRefineFactor;
      g = refine_window(points, g, step, params.p);
    }
    if (g.energy < best.energy) best = g;
  }

  std::vector<Subspace> lines;
  for (double a : best.angles) lines.push_back(Subspace::line(a));
  OptResult out;
  out.tuple = SubspaceTuple(std::move(lines));
  out.energy = energy_sum(points, out.tuple, params.p);
  out.iterations = static_cast<std::size_t>(spec.levels) + 1;
  out.converged = true;
  out.history = {out.energy};
  out.restarts_used = take;
  return out;
}

Certificate local_min_certificate(const Matrix& points, const SubspaceTuple& tuple,
                                  double p, std::size_t n_directions, double step,
                                  Rng& rng) {
  EnergyParams params(p);
  if (!(step > 0.0)) fail(ErrorKind::domain, "certificate step must be positive");
  const double base = energy_sum(points, tuple, params.p);
  Certificate out;
  out.worst_direction_gap = std::numeric_limits<double>::infinity();
  const std::size_t max_attempts = 10 * std::max<std::size_t>(n_directions, 1);
  std::size_t attempts = 0;
  while (out.directions < n_directions) {
    if (attempts++ >= max_attempts) {
      fail(ErrorKind::degenerate, "could not draw non-degenerate geodesic directions");
    }
    std::vector<Matrix> tangents;
    double longest = 0.0;
    for (const auto& l : tuple) {
      tangents.push_back(random_tangent(l, rng));
      longest = std::max(longest, tangents.back().norm());
    }
    if (!(longest > 1e-12)) {
      ++out.resampled;
      continue;
    }
    std::vector<Subspace> moved;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      moved.push_back(geodesic_along(tuple[i], tangents[i] / longest, step));
    }
    const double e = energy_sum(points, SubspaceTuple(std::move(moved)), params.p);
    out.worst_direction_gap = std::min(out.worst_direction_gap, e - base);
    ++out.directions;
  }
  out.is_local_min = out.worst_direction_gap >= -1e-12;
  return out;
}

std::vector<RegionFit> restricted_best_fit_check(const Matrix& points,
                                                 const SubspaceTuple& tuple, double p,
                                                 const RestrictedFitOptions& opts) {
  EnergyParams params(p);
  const VoronoiAssignment assign = voronoi_labels(points, tuple);
  std::vector<RegionFit> out;
  const int d = tuple.dim();
  const int big_d = tuple.ambient_dim();
  for (std::size_t j = 0; j < tuple.size(); ++j) {
    RegionFit fit;
    fit.region = j + 1;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      if (assign.labels[static_cast<std::size_t>(i)] == static_cast<int>(j + 1)) idx.push_back(i);
    }
    fit.count = idx.size();
    if (idx.size() < static_cast<std::size_t>(d)) {
      fit.empty = true;
      out.push_back(std::move(fit));
      continue;
    }
    const Matrix region = rows_of(points, idx);
    Subspace best = tuple[j];
    if (params.p == 2.0) {
      best = fit_subspace_lp(region, d, 2.0);
    } else if (big_d == 2 && d == 1) {
      best = grid_search_global(region, 1, params.p, opts.grid).tuple[0];
    } else {
      double best_energy = std::numeric_limits<double>::infinity();
      std::vector<std::optional<Subspace>> inits = {tuple[j], std::nullopt};
      Rng rng(derive_seed(opts.seed, j));
      for (std::size_t r = 0; r < opts.restarts; ++r) inits.emplace_back(random_subspace(big_d, d, rng));
      for (const auto& init : inits) {
        IrlsOptions irls;
        irls.init = init;
        Subspace cand = fit_subspace_lp(region, d, params.p, irls);
        const double e = subspace_energy(region, cand, params.p);
        if (e < best_energy) {
          best_energy = e;
          best = cand;
        }
      }
    }
    fit.distance = dist_grassmann(best, tuple[j]);
    fit.best = best;
    out.push_back(std::move(fit));
  }
  return out;
}

}  // namespace hlm
