#include "hsi/bundles.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hsi {

namespace {

constexpr int kKmeansRestarts = 20;
constexpr int kKmeansMaxIter = 100;
constexpr double kRankTolerance = 1e-12;

/// Columns are the eigenvectors of the symmetric matrix S for its d largest
/// eigenvalues, in decreasing eigenvalue order.
Matrix top_eigenvectors(const Matrix& s, int d) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) {
    throw DataError("eigendecomposition failed on degenerate data");
  }
  const Eigen::Index n = s.rows();
  Matrix out(n, d);
  for (int j = 0; j < d; ++j) {
    out.col(j) = es.eigenvectors().col(n - 1 - j);
  }
  return out;
}

int count_significant_eigenvalues(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (top <= 0.0) {
    return 0;
  }
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > kRankTolerance * top) {
      ++count;
    }
  }
  return count;
}

}  // namespace

void BundleExtractionConfig::validate(int pixels) const {
  if (subset_count <= 0) {
    throw ConfigError("subset count must be positive");
  }
  if (!(subset_fraction > 0.0 && subset_fraction <= 1.0)) {
    throw ConfigError("subset fraction must lie in (0, 1]");
  }
  if (endmembers_per_run <= 0) {
    throw ConfigError("endmembers per run must be positive");
  }
  const int size = static_cast<int>(subset_fraction * pixels);
  if (size < endmembers_per_run) {
    throw ConfigError("each subset holds " + std::to_string(size) +
                      " pixels, fewer than the " +
                      std::to_string(endmembers_per_run) +
                      " endmembers requested per run");
  }
}

std::vector<std::vector<int>> sample_subsets(int pixels,
                                             const BundleExtractionConfig& cfg,
                                             std::mt19937_64& rng) {
  cfg.validate(pixels);
  const int size = static_cast<int>(cfg.subset_fraction * pixels);
  std::vector<std::vector<int>> subsets;
  subsets.reserve(static_cast<std::size_t>(cfg.subset_count));
  std::vector<int> pool(static_cast<std::size_t>(pixels));
  for (int run = 0; run < cfg.subset_count; ++run) {
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < size; ++i) {
      std::uniform_int_distribution<int> pick(i, pixels - 1);
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(pick(rng))]);
    }
    subsets.emplace_back(pool.begin(), pool.begin() + size);
  }
  return subsets;
}

Matrix vca(const Matrix& data, int endmembers, std::mt19937_64& rng) {
  const Eigen::Index L = data.rows();
  const Eigen::Index n = data.cols();
  const int p = endmembers;
  if (p <= 0) {
    throw ConfigError("endmember count must be positive");
  }
  if (n < p) {
    throw DataError("cannot extract " + std::to_string(p) + " endmembers from " +
                    std::to_string(n) + " pixels");
  }

  if (p == 1) {
    const Matrix corr = data * data.transpose() / static_cast<double>(n);
    const Matrix u1 = top_eigenvectors(corr, 1);
    const Vector scores = (data.transpose() * u1.col(0)).cwiseAbs();
    Eigen::Index best = 0;
    scores.maxCoeff(&best);
    return data.col(best);
  }

  const Vector mean = data.rowwise().mean();
  const Matrix centered = data.colwise() - mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n);

  const Matrix ud_p = top_eigenvectors(cov, p);
  const Matrix x_p = ud_p.transpose() * centered;

  const double power_y = data.squaredNorm() / static_cast<double>(n);
  const double power_x =
      x_p.squaredNorm() / static_cast<double>(n) + mean.squaredNorm();
  const double num = power_x - static_cast<double>(p) / static_cast<double>(L) * power_y;
  const double den = power_y - power_x;
  const double snr = 10.0 * std::log10(num / den);
  const double snr_threshold = 15.0 + 10.0 * std::log10(static_cast<double>(p));
  const bool projective = std::isfinite(snr) && snr > snr_threshold;

  Matrix Y;
  if (projective) {
    const Matrix corr = data * data.transpose() / static_cast<double>(n);
    if (count_significant_eigenvalues(corr) < p) {
      throw DataError("degenerate data: signal subspace has fewer than " +
                      std::to_string(p) + " dimensions");
    }
    const Matrix ud = top_eigenvectors(corr, p);
    const Matrix proj = ud.transpose() * data;
    const Vector u = proj.rowwise().mean();
    Y.resize(p, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double scale = proj.col(k).dot(u);
      if (std::fabs(scale) < 1e-300) {
        throw DataError("degenerate data: projective normalization collapsed");
      }
      Y.col(k) = proj.col(k) / scale;
    }
  } else {
    if (count_significant_eigenvalues(cov) < p - 1) {
      throw DataError("degenerate data: signal subspace has fewer than " +
                      std::to_string(p - 1) + " dimensions");
    }
    const Matrix x = x_p.topRows(p - 1);
    const double c = x.colwise().norm().maxCoeff();
    Y.resize(p, n);
    Y.topRows(p - 1) = x;
    Y.row(p - 1).setConstant(c);
  }

  // Pick one endmember per pass along a random direction made orthogonal to
  // the span of the picks so far (the very first pass excludes the lifted
  // coordinate axis instead).
  std::vector<int> picked;
  picked.reserve(static_cast<std::size_t>(p));
  Matrix basis(p, p);
  int basis_count = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < p; ++i) {
    Vector f(p);
    bool ok = false;
    for (int attempt = 0; attempt < 32 && !ok; ++attempt) {
      for (int j = 0; j < p; ++j) {
        f(j) = unit(rng);
      }
      if (i == 0) {
        f(p - 1) = 0.0;
      } else {
        for (int b = 0; b < basis_count; ++b) {
          f -= basis.col(b).dot(f) * basis.col(b);
        }
      }
      const double norm = f.norm();
      if (norm > 1e-12) {
        f /= norm;
        ok = true;
      }
    }
    if (!ok) {
      throw DataError("degenerate data: selected endmembers span the whole space "
                      "after " + std::to_string(i) + " picks");
    }
    Eigen::Index best = 0;
    (f.transpose() * Y).array().abs().maxCoeff(&best);
    picked.push_back(static_cast<int>(best));

    Vector e = Y.col(best);
    for (int b = 0; b < basis_count; ++b) {
      e -= basis.col(b).dot(e) * basis.col(b);
    }
    const double enorm = e.norm();
    if (enorm > 1e-12) {
      basis.col(basis_count++) = e / enorm;
    }
  }

  Matrix out(L, p);
  for (int i = 0; i < p; ++i) {
    out.col(i) = data.col(picked[static_cast<std::size_t>(i)]);
  }
  return out;
}

double spectral_angle(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    throw DataError("spectral angle is undefined for a zero vector");
  }
  // acos(dot / (nu * nv)) loses half the significand near 0 and pi; the
  // atan2 form stays fully accurate and returns exactly 0 for identical
  // inputs.
  const Vector a = u / nu;
  const Vector b = v / nv;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

namespace {

double angle_unit(const Vector& a, const Vector& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

struct KmeansRun {
  std::vector<int> assignment;
  double objective = std::numeric_limits<double>::infinity();
  bool valid = false;
};

KmeansRun kmeans_once(const Matrix& z, int k, std::mt19937_64& rng,
                      std::vector<double>* trace) {
  const Eigen::Index n = z.cols();
  Matrix centroids(z.rows(), k);

  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centroids.col(0) = z.col(pick(rng));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = angle_unit(z.col(i), centroids.col(0));
  }
  for (int j = 1; j < k; ++j) {
    Eigen::Index far = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)]) {
        far = i;
      }
    }
    centroids.col(j) = z.col(far);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist[static_cast<std::size_t>(i)] = std::min(
          dist[static_cast<std::size_t>(i)], angle_unit(z.col(i), centroids.col(j)));
    }
  }

  KmeansRun run;
  run.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int iter = 0; iter < kKmeansMaxIter; ++iter) {
    bool changed = false;
    double objective = 0.0;
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_angle = angle_unit(z.col(i), centroids.col(0));
      for (int j = 1; j < k; ++j) {
        const double a = angle_unit(z.col(i), centroids.col(j));
        if (a < best_angle) {
          best_angle = a;
          best = j;
        }
      }
      if (run.assignment[static_cast<std::size_t>(i)] != best) {
        run.assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
      counts[static_cast<std::size_t>(best)] += 1;
      objective += best_angle;
    }
    if (trace != nullptr) {
      trace->push_back(objective);
    }

    bool repaired = false;
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        continue;
      }
      // Reseed the empty cluster from the signature farthest from its
      // current centroid.
      Eigen::Index far = 0;
      double far_angle = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double a = angle_unit(
            z.col(i), centroids.col(run.assignment[static_cast<std::size_t>(i)]));
        if (a > far_angle && counts[static_cast<std::size_t>(
                                 run.assignment[static_cast<std::size_t>(i)])] > 1) {
          far_angle = a;
          far = i;
        }
      }
      if (far_angle < 0.0) {
        return run;  // not repairable: fewer distinct points than clusters
      }
      counts[static_cast<std::size_t>(
          run.assignment[static_cast<std::size_t>(far)])] -= 1;
      run.assignment[static_cast<std::size_t>(far)] = j;
      counts[static_cast<std::size_t>(j)] = 1;
      centroids.col(j) = z.col(far);
      repaired = true;
    }

    if (!changed && !repaired && iter > 0) {
      run.objective = objective;
      run.valid = true;
      return run;
    }

    for (int j = 0; j < k; ++j) {
      Vector sum = Vector::Zero(z.rows());
      for (Eigen::Index i = 0; i < n; ++i) {
        if (run.assignment[static_cast<std::size_t>(i)] == j) {
          sum += z.col(i);
        }
      }
      const double norm = sum.norm();
      if (norm > 1e-12) {
        centroids.col(j) = sum / norm;
      }
      // A vanishing mean leaves the previous centroid in place.
    }
  }

  // Hit the iteration cap: score the final state.
  double objective = 0.0;
  std::fill(counts.begin(), counts.end(), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    objective +=
        angle_unit(z.col(i), centroids.col(run.assignment[static_cast<std::size_t>(i)]));
    counts[static_cast<std::size_t>(run.assignment[static_cast<std::size_t>(i)])] += 1;
  }
  run.valid = std::all_of(counts.begin(), counts.end(), [](int c) { return c > 0; });
  run.objective = objective;
  return run;
}

}  // namespace

std::pair<EndmemberDictionary, GroupStructure> cluster_bundles(
    const Matrix& signatures, int bundle_count, std::mt19937_64& rng,
    ClusterDiagnostics* diagnostics) {
  const Eigen::Index n = signatures.cols();
  if (bundle_count <= 0) {
    throw ConfigError("bundle count must be positive");
  }
  if (n < bundle_count) {
    throw DataError("cannot form " + std::to_string(bundle_count) +
                    " bundles from " + std::to_string(n) + " signatures");
  }
  Matrix z(signatures.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = signatures.col(i).norm();
    if (norm == 0.0) {
      throw DataError("signature " + std::to_string(i) + " is the zero vector");
    }
    z.col(i) = signatures.col(i) / norm;
  }

  KmeansRun best;
  for (int restart = 0; restart < kKmeansRestarts; ++restart) {
    std::vector<double>* trace = nullptr;
    if (diagnostics != nullptr) {
      diagnostics->objective_per_restart.emplace_back();
      trace = &diagnostics->objective_per_restart.back();
    }
    KmeansRun run = kmeans_once(z, bundle_count, rng, trace);
    if (run.valid && run.objective < best.objective) {
      best = std::move(run);
    }
  }
  if (!best.valid) {
    throw DataError("clustering failed: a bundle stayed empty across restarts");
  }

  // Relabel clusters by their smallest member index so the output ordering
  // does not depend on initialization.
  std::vector<int> first_member(static_cast<std::size_t>(bundle_count),
                               std::numeric_limits<int>::max());
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& fm = first_member[static_cast<std::size_t>(
        best.assignment[static_cast<std::size_t>(i)])];
    fm = std::min(fm, static_cast<int>(i));
  }
  std::vector<int> order(static_cast<std::size_t>(bundle_count));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return first_member[static_cast<std::size_t>(a)] <
           first_member[static_cast<std::size_t>(b)];
  });
  std::vector<int> relabel(static_cast<std::size_t>(bundle_count));
  for (int rank = 0; rank < bundle_count; ++rank) {
    relabel[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = rank;
  }

  Matrix reordered(signatures.rows(), n);
  std::vector<int> assignment(static_cast<std::size_t>(n));
  Eigen::Index out_col = 0;
  for (int g = 0; g < bundle_count; ++g) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (relabel[static_cast<std::size_t>(
              best.assignment[static_cast<std::size_t>(i)])] == g) {
        reordered.col(out_col) = signatures.col(i);
        assignment[static_cast<std::size_t>(out_col)] = g;
        ++out_col;
      }
    }
  }
  return {EndmemberDictionary(std::move(reordered)),
          GroupStructure(bundle_count, std::move(assignment))};
}

std::pair<EndmemberDictionary, GroupStructure> extract_bundles(
    const SpectralImage& image, const BundleExtractionConfig& cfg) {
  cfg.validate(image.pixels());
  std::mt19937_64 rng(cfg.seed);
  const auto subsets = sample_subsets(image.pixels(), cfg, rng);
  // Substreams are drawn up front so the runs stay independent of execution
  // order.
  std::vector<std::uint64_t> run_seeds(subsets.size());
  for (auto& s : run_seeds) {
    s = rng();
  }

  const int p = cfg.endmembers_per_run;
  Matrix pooled(image.bands(),
                static_cast<Eigen::Index>(subsets.size()) * p);
  for (std::size_t run = 0; run < subsets.size(); ++run) {
    const auto& idx = subsets[run];
    Matrix sub(image.bands(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      sub.col(static_cast<Eigen::Index>(i)) =
          image.data().col(idx[i]);
    }
    std::mt19937_64 run_rng(run_seeds[run]);
    pooled.middleCols(static_cast<Eigen::Index>(run) * p, p) = vca(sub, p, run_rng);
  }
  return cluster_bundles(pooled, p, rng);
}

}  // namespace hsi
