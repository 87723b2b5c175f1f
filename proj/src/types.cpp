#include "hsi/types.hpp"

#include <algorithm>
#include <cmath>

namespace hsi {

SpectralImage::SpectralImage(Matrix data, std::optional<Layout> layout)
    : data_(std::move(data)), layout_(layout) {
  if (data_.rows() < 2 || data_.cols() == 0) {
    throw DataError("spectral image needs at least 2 bands and 1 pixel, got " +
                    std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()));
  }
  if (!data_.allFinite()) {
    throw DataError("spectral image contains non-finite entries");
  }
  if (layout_) {
    if (layout_->width <= 0 || layout_->height <= 0) {
      throw DataError("image layout dimensions must be positive");
    }
    const long expected = static_cast<long>(layout_->width) * layout_->height;
    if (expected != data_.cols()) {
      throw DataError("image layout " + std::to_string(layout_->width) + "x" +
                      std::to_string(layout_->height) + " does not match " +
                      std::to_string(data_.cols()) + " pixels");
    }
  }
}

EndmemberDictionary::EndmemberDictionary(Matrix signatures)
    : signatures_(std::move(signatures)) {
  if (signatures_.rows() == 0 || signatures_.cols() == 0) {
    throw DataError("endmember dictionary must be non-empty");
  }
  if (!signatures_.allFinite()) {
    throw DataError("endmember dictionary contains non-finite entries");
  }
  for (Eigen::Index c = 0; c < signatures_.cols(); ++c) {
    if (signatures_.col(c).norm() == 0.0) {
      throw DataError("dictionary atom " + std::to_string(c) + " has zero norm");
    }
  }
}

GroupStructure::GroupStructure(int group_count, std::vector<int> assignment)
    : group_count_(group_count), assignment_(std::move(assignment)) {
  if (group_count_ <= 0) {
    throw DataError("group count must be positive");
  }
  if (assignment_.empty()) {
    throw DataError("group assignment must cover at least one atom");
  }
  members_.resize(group_count_);
  for (int atom = 0; atom < static_cast<int>(assignment_.size()); ++atom) {
    const int g = assignment_[atom];
    if (g < 0 || g >= group_count_) {
      throw DataError("atom " + std::to_string(atom) + " assigned to group " +
                      std::to_string(g + 1) + ", expected 1.." +
                      std::to_string(group_count_));
    }
    members_[g].push_back(atom);
  }
  for (int g = 0; g < group_count_; ++g) {
    if (members_[g].empty()) {
      throw DataError("group " + std::to_string(g + 1) + " has no atoms");
    }
  }
  contiguous_ = true;
  for (int g = 0; g < group_count_ && contiguous_; ++g) {
    const auto& m = members_[g];
    for (std::size_t i = 1; i < m.size(); ++i) {
      if (m[i] != m[i - 1] + 1) {
        contiguous_ = false;
        break;
      }
    }
  }
}

Matrix GroupStructure::indicator_matrix() const {
  Matrix m = Matrix::Zero(group_count_, atom_count());
  for (int atom = 0; atom < atom_count(); ++atom) {
    m(assignment_[atom], atom) = 1.0;
  }
  return m;
}

AbundanceMatrix::AbundanceMatrix(Matrix data, AbundanceMode mode)
    : data_(std::move(data)), mode_(mode) {
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw DataError("abundance matrix must be non-empty");
  }
  if (!data_.allFinite()) {
    throw DataError("abundance matrix contains non-finite entries");
  }
  if (data_.minCoeff() < -kNegativeSlack) {
    throw DataError("abundance matrix has an entry below -" +
                    std::to_string(kNegativeSlack));
  }
}

double AbundanceMatrix::max_sum_to_one_error() const {
  return (data_.colwise().sum().array() - 1.0).abs().maxCoeff();
}

const char* penalty_name(Penalty p) {
  switch (p) {
    case Penalty::none: return "none";
    case Penalty::l1: return "l1";
    case Penalty::collaborative: return "collaborative";
    case Penalty::group: return "group";
    case Penalty::elitist: return "elitist";
    case Penalty::fractional: return "fractional";
  }
  return "unknown";
}

Penalty penalty_from_name(const std::string& name) {
  if (name == "none") return Penalty::none;
  if (name == "l1") return Penalty::l1;
  if (name == "collaborative") return Penalty::collaborative;
  if (name == "group") return Penalty::group;
  if (name == "elitist") return Penalty::elitist;
  if (name == "fractional") return Penalty::fractional;
  throw ConfigError("unknown penalty '" + name +
                    "', expected one of none, l1, collaborative, group, "
                    "elitist, fractional");
}

bool penalty_needs_groups(Penalty p) {
  return p == Penalty::group || p == Penalty::elitist || p == Penalty::fractional;
}

void SolverConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a nonnegative finite value");
  }
  if (!(rho > 0.0)) {
    throw ConfigError("rho must be positive");
  }
  if (penalty == Penalty::fractional && !(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("fraction must lie strictly between 0 and 1");
  }
  if (max_iter <= 0) {
    throw ConfigError("max_iter must be positive");
  }
  if (!(rel_tol >= 0.0)) {
    throw ConfigError("rel_tol must be nonnegative");
  }
}

}  // namespace hsi
