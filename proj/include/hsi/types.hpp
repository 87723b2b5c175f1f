#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical slack tolerated on abundance entries below zero (projection round-off).
inline constexpr double kNegativeSlack = 1e-9;
/// Collapsed abundance above which a group counts as active when forming
/// per-pixel equivalent endmembers.
inline constexpr double kGroupActiveThreshold = 1e-8;
/// Column sums of sum-to-one abundances must match 1 within this.
inline constexpr double kSumToOneTolerance = 1e-6;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown keys, out-of-range parameters, missing required flags.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad or inconsistent data: parse failures, shape mismatches, degenerate inputs.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during solver iterations.
class SolverDivergence : public Error {
 public:
  SolverDivergence(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_ = -1;
};

struct Layout {
  int width = 0;
  int height = 0;
};

/// L x N reflectance matrix, optionally carrying a (width, height) pixel grid.
/// Pixel k maps to grid position (k % width, k / width).
class SpectralImage {
 public:
  SpectralImage(Matrix data, std::optional<Layout> layout = std::nullopt);

  int bands() const { return static_cast<int>(data_.rows()); }
  int pixels() const { return static_cast<int>(data_.cols()); }
  const Matrix& data() const { return data_; }
  const std::optional<Layout>& layout() const { return layout_; }

 private:
  Matrix data_;
  std::optional<Layout> layout_;
};

/// L x Q matrix of candidate endmember signatures (columns).
class EndmemberDictionary {
 public:
  explicit EndmemberDictionary(Matrix signatures);

  int bands() const { return static_cast<int>(signatures_.rows()); }
  int atoms() const { return static_cast<int>(signatures_.cols()); }
  const Matrix& signatures() const { return signatures_; }

 private:
  Matrix signatures_;
};

/// Partition of Q dictionary atoms into P material groups.
/// Group ids are 0-based internally; the on-disk format is 1-based.
class GroupStructure {
 public:
  GroupStructure(int group_count, std::vector<int> assignment);

  int group_count() const { return group_count_; }
  int atom_count() const { return static_cast<int>(assignment_.size()); }
  int group_of(int atom) const { return assignment_.at(atom); }
  int group_size(int group) const { return static_cast<int>(members_[group].size()); }
  const std::vector<int>& members(int group) const { return members_[group]; }
  const std::vector<int>& assignment() const { return assignment_; }
  /// True when every group occupies one consecutive run of atom indices.
  bool contiguous() const { return contiguous_; }

  /// P x Q binary indicator: row i has ones on group i's atom columns.
  Matrix indicator_matrix() const;

 private:
  int group_count_ = 0;
  std::vector<int> assignment_;
  std::vector<std::vector<int>> members_;
  bool contiguous_ = false;
};

enum class AbundanceMode { per_atom, collapsed };

/// Q x N (per-atom) or P x N (collapsed) abundance coefficients.
class AbundanceMatrix {
 public:
  AbundanceMatrix(Matrix data, AbundanceMode mode);

  int rows() const { return static_cast<int>(data_.rows()); }
  int pixels() const { return static_cast<int>(data_.cols()); }
  AbundanceMode mode() const { return mode_; }
  const Matrix& data() const { return data_; }

  /// Largest |column sum - 1| over all pixels.
  double max_sum_to_one_error() const;

 private:
  Matrix data_;
  AbundanceMode mode_;
};

enum class Penalty { none, l1, collaborative, group, elitist, fractional };

const char* penalty_name(Penalty p);
Penalty penalty_from_name(const std::string& name);
bool penalty_needs_groups(Penalty p);

struct SolverConfig {
  Penalty penalty = Penalty::none;
  double lambda = 0.0;
  double rho = 10.0;
  double fraction = 0.1;
  int max_iter = 1000;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

}  // namespace hsi
