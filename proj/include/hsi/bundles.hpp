#pragma once

#include "hsi/types.hpp"

#include <random>
#include <utility>
#include <vector>

namespace hsi {

struct BundleExtractionConfig {
  /// Number of random pixel subsets, one extraction run each.
  int subset_count = 10;
  /// Fraction of pixels drawn per subset, in (0, 1].
  double subset_fraction = 0.10;
  /// Endmembers extracted per run; also the number of output groups.
  int endmembers_per_run = 0;
  std::uint64_t seed = 0;

  void validate(int pixels) const;
};

/// m index sets of size floor(fraction * N), each drawn without replacement;
/// different sets may overlap.
std::vector<std::vector<int>> sample_subsets(int pixels,
                                             const BundleExtractionConfig& cfg,
                                             std::mt19937_64& rng);

/// Vertex component analysis. Returns P columns of the input (pure-pixel
/// extraction): an SNR estimate picks between a projective projection onto a
/// P-dimensional signal subspace and an affine projection onto P-1 principal
/// components lifted by a constant row, then endmembers are selected one at a
/// time by maximizing along random directions orthogonal to the span of those
/// already picked.
Matrix vca(const Matrix& data, int endmembers, std::mt19937_64& rng);

/// Angle between two nonzero vectors in radians, scale-invariant, in [0, pi].
double spectral_angle(const Vector& u, const Vector& v);

/// Per-restart traces of the clustering objective (total angle to assigned
/// centroids), one value per k-means iteration.
struct ClusterDiagnostics {
  std::vector<std::vector<double>> objective_per_restart;
};

/// Spectral-angle k-means over unit-normalized signatures: farthest-point
/// initialization, normalized-mean centroids, 20 restarts keeping the lowest
/// total angle. Returns the input signatures reordered so each group occupies
/// a contiguous column range, plus the grouping. Cluster sizes may differ.
std::pair<EndmemberDictionary, GroupStructure> cluster_bundles(
    const Matrix& signatures, int bundle_count, std::mt19937_64& rng,
    ClusterDiagnostics* diagnostics = nullptr);

/// Full pipeline: sample subsets, run vca on each, pool the mP signatures,
/// cluster into P bundles. Deterministic for a fixed cfg.seed; each
/// extraction run uses its own pre-drawn substream, so runs are independent.
std::pair<EndmemberDictionary, GroupStructure> extract_bundles(
    const SpectralImage& image, const BundleExtractionConfig& cfg);

}  // namespace hsi
