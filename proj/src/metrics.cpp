#include "hsi/metrics.hpp"

#include "hsi/bundles.hpp"
#include "hsi/keyval.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace hsi {

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DataError(std::string(what) + ": shape mismatch, " +
                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
  if (a.cols() == 0) {
    throw DataError(std::string(what) + ": no pixels");
  }
}

double column_rmse_mean(const Matrix& estimated, const Matrix& truth,
                        double inner_scale) {
  const Eigen::Index n = truth.cols();
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    total += std::sqrt(inner_scale * (estimated.col(k) - truth.col(k)).squaredNorm());
  }
  return total / static_cast<double>(n);
}

void check_endmember_pair(const PerPixelEndmembers& estimated,
                          const PerPixelEndmembers& truth, const char* what) {
  if (estimated.bands != truth.bands || estimated.group_count != truth.group_count ||
      estimated.pixels != truth.pixels) {
    throw DataError(std::string(what) + ": per-pixel endmember sets disagree in shape");
  }
}

template <typename PerPair>
std::pair<double, int> endmember_mean(const PerPixelEndmembers& estimated,
                                      const PerPixelEndmembers& truth,
                                      const char* what, PerPair per_pair) {
  check_endmember_pair(estimated, truth, what);
  double total = 0.0;
  int pairs = 0;
  for (int k = 0; k < truth.pixels; ++k) {
    for (int p = 0; p < truth.group_count; ++p) {
      if (!truth.defined(p, k) || !estimated.defined(p, k)) continue;
      total += per_pair(estimated.signatures.col(estimated.column(p, k)),
                        truth.signatures.col(truth.column(p, k)));
      ++pairs;
    }
  }
  if (pairs == 0) {
    throw DataError(std::string(what) + ": no (pixel, material) pair is defined on both sides");
  }
  return {total / pairs, pairs};
}

}  // namespace

double rmse_abundance(const Matrix& estimated, const Matrix& truth) {
  check_same_shape(estimated, truth, "rmse_abundance");
  return column_rmse_mean(estimated, truth, 1.0 / static_cast<double>(truth.rows()));
}

double rmse_group(const Matrix& estimated, const Matrix& truth,
                  const GroupStructure& groups, bool per_atom_normalization) {
  check_same_shape(estimated, truth, "rmse_group");
  if (truth.rows() != groups.atom_count()) {
    throw DataError("rmse_group: abundance rows " + std::to_string(truth.rows()) +
                    " do not match the " + std::to_string(groups.atom_count()) +
                    "-atom group structure");
  }
  const double denom = per_atom_normalization
                           ? static_cast<double>(groups.atom_count())
                           : static_cast<double>(groups.group_count());
  return column_rmse_mean(estimated, truth, 1.0 / denom);
}

std::pair<double, int> rmse_endmembers(const PerPixelEndmembers& estimated,
                                       const PerPixelEndmembers& truth) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(truth.bands));
  return endmember_mean(estimated, truth, "rmse_endmembers",
                        [scale](const auto& est, const auto& ref) {
                          return scale * (est - ref).norm();
                        });
}

std::pair<double, int> sam_endmembers(const PerPixelEndmembers& estimated,
                                      const PerPixelEndmembers& truth) {
  return endmember_mean(estimated, truth, "sam_endmembers",
                        [](const auto& est, const auto& ref) {
                          return kRadToDeg * spectral_angle(est, ref);
                        });
}

std::pair<double, double> reconstruction_metrics(const Matrix& image,
                                                 const EndmemberDictionary& dict,
                                                 const Matrix& per_atom) {
  if (image.rows() != dict.bands()) {
    throw DataError("reconstruction_metrics: image has " + std::to_string(image.rows()) +
                    " bands but the dictionary has " + std::to_string(dict.bands()));
  }
  if (per_atom.rows() != dict.atoms()) {
    throw DataError("reconstruction_metrics: abundance rows " +
                    std::to_string(per_atom.rows()) + " do not match the " +
                    std::to_string(dict.atoms()) + "-atom dictionary");
  }
  const Matrix recon = dict.signatures() * per_atom;
  check_same_shape(recon, image, "reconstruction_metrics");
  const double rmse =
      column_rmse_mean(recon, image, 1.0 / static_cast<double>(image.rows()));
  double angle_total = 0.0;
  for (Eigen::Index k = 0; k < image.cols(); ++k) {
    angle_total += kRadToDeg * spectral_angle(image.col(k), recon.col(k));
  }
  return {rmse, angle_total / static_cast<double>(image.cols())};
}

namespace {

const char* const kMetricNames[] = {
    "rmse_abundance",     "rmse_group",
    "rmse_endmembers",    "sam_endmembers_degrees",
    "evaluated_pairs",    "reconstruction_rmse",
    "reconstruction_sam_degrees",
};

std::string cell(const std::optional<double>& v) {
  return v ? keyval::format_double(*v) : std::string();
}

void append_kv(std::string& out, const char* key, const std::optional<double>& v) {
  if (v) out += std::string(key) + "=" + keyval::format_double(*v) + "\n";
}

}  // namespace

std::string metric_csv_header() {
  std::string out;
  for (const char* name : kMetricNames) {
    if (!out.empty()) out += ',';
    out += name;
  }
  return out;
}

std::string metric_csv_row(const MetricReport& r) {
  std::string pairs = r.evaluated_pairs ? std::to_string(*r.evaluated_pairs) : std::string();
  return cell(r.rmse_abundance) + "," + cell(r.rmse_group) + "," +
         cell(r.rmse_endmembers) + "," + cell(r.sam_endmembers_degrees) + "," +
         pairs + "," + cell(r.reconstruction_rmse) + "," +
         cell(r.reconstruction_sam_degrees);
}

std::string metric_keyvalues(const MetricReport& r) {
  std::string out;
  append_kv(out, "rmse_abundance", r.rmse_abundance);
  append_kv(out, "rmse_group", r.rmse_group);
  append_kv(out, "rmse_endmembers", r.rmse_endmembers);
  append_kv(out, "sam_endmembers_degrees", r.sam_endmembers_degrees);
  if (r.evaluated_pairs) {
    out += "evaluated_pairs=" + std::to_string(*r.evaluated_pairs) + "\n";
  }
  append_kv(out, "reconstruction_rmse", r.reconstruction_rmse);
  append_kv(out, "reconstruction_sam_degrees", r.reconstruction_sam_degrees);
  return out;
}

}  // namespace hsi
