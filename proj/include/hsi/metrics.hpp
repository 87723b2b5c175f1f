#pragma once

#include "hsi/core.hpp"
#include "hsi/types.hpp"

#include <optional>
#include <string>
#include <utility>

namespace hsi {

struct MetricReport {
  std::optional<double> rmse_abundance;
  std::optional<double> rmse_group;
  std::optional<double> rmse_endmembers;
  std::optional<double> sam_endmembers_degrees;
  /// (pixel, material) pairs that entered the endmember metrics.
  std::optional<int> evaluated_pairs;
  std::optional<double> reconstruction_rmse;
  std::optional<double> reconstruction_sam_degrees;
};

/// (1/N) sum_k sqrt((1/P) sum_p (a_pk - ahat_pk)^2) on collapsed matrices.
double rmse_abundance(const Matrix& estimated, const Matrix& truth);

/// Same shape of formula on per-atom matrices, inner sum over all Q atoms.
/// The default keeps the 1/P normalization inside the root; the alternative
/// uses 1/Q.
double rmse_group(const Matrix& estimated, const Matrix& truth,
                  const GroupStructure& groups, bool per_atom_normalization = false);

/// Mean over evaluated (pixel, material) pairs of (1/sqrt(L)) ||b - s_hat||.
/// A pair is evaluated when both sides are defined. Returns the mean and the
/// pair count.
std::pair<double, int> rmse_endmembers(const PerPixelEndmembers& estimated,
                                       const PerPixelEndmembers& truth);

/// Mean spectral angle in degrees over the same evaluated pairs.
std::pair<double, int> sam_endmembers(const PerPixelEndmembers& estimated,
                                      const PerPixelEndmembers& truth);

/// Pixel-averaged (1/sqrt(L)) ||x_k - xhat_k|| and mean pixelwise spectral
/// angle in degrees between the image and its reconstruction B * A.
std::pair<double, double> reconstruction_metrics(const Matrix& image,
                                                 const EndmemberDictionary& dict,
                                                 const Matrix& per_atom);

/// csv row (with matching header) and flat key=value lines; absent metrics
/// leave empty csv cells and are omitted from the key=value form.
std::string metric_csv_header();
std::string metric_csv_row(const MetricReport& report);
std::string metric_keyvalues(const MetricReport& report);

}  // namespace hsi
