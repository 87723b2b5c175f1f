#pragma once

#include "hsi/core.hpp"
#include "hsi/types.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hsi {

struct SceneSpec {
  int materials = 5;
  int variants_per_material = 5;
  int width = 30;
  int height = 30;
  int bands = 100;
  int min_active = 1;
  int max_active = 3;
  double psi_min = 0.75;
  double psi_max = 1.25;
  double beta_min = -0.1;
  double beta_max = 0.1;
  double variant_noise = 0.005;
  /// Additive pixel noise level; +infinity means noiseless.
  double snr_db = 30.0;
  std::uint64_t seed = 0;

  int pixels() const { return width * height; }
  int atoms() const { return materials * variants_per_material; }
  void validate() const;
};

struct GroundTruth {
  Matrix base_signatures;  // L x P
  EndmemberDictionary dictionary;
  GroupStructure groups;
  Matrix per_atom;    // Q x N, at most one nonzero atom per group per pixel
  Matrix collapsed;   // P x N, columns on the simplex
  /// Atom chosen to represent each (material, pixel); -1 when inactive.
  Eigen::MatrixXi chosen_atom;

  /// The chosen variant per active material at every pixel.
  PerPixelEndmembers per_pixel_endmembers() const;
};

/// Smooth positive spectra in (0, 1]: a few Gaussian bumps over the band axis
/// plus a constant offset, normalized to peak at 1.
Matrix generate_base_signatures(int materials, int bands, std::mt19937_64& rng);

/// psi * s + beta * s^2 + noise, clipped below at zero, one column per variant.
Matrix generate_variants(const Vector& base, int count, const SceneSpec& spec,
                         std::mt19937_64& rng);

/// Spatially smooth sparse abundance maps: one Gaussian-filtered white-noise
/// field per material; per pixel the top-k fields stay active (k uniform in
/// [min_active, max_active]) and are renormalized to sum to 1.
Matrix generate_abundance_field(const SceneSpec& spec, std::mt19937_64& rng);

/// Full scene: dictionary of variants, abundance fields, one active variant
/// per material per pixel, additive Gaussian noise at spec.snr_db.
std::pair<SpectralImage, GroundTruth> generate_scene(const SceneSpec& spec);

/// Writes scene.bin, dictionary.bin, groups.txt, truth_atom.bin,
/// truth_group.bin and spec.txt into the directory.
void save_scene(const std::string& directory, const SpectralImage& image,
                const GroundTruth& truth, const SceneSpec& spec);

}  // namespace hsi
