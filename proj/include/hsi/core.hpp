#pragma once

#include "hsi/types.hpp"

#include <utility>
#include <vector>

namespace hsi {

/// Sums per-atom abundances within each group: (P x N) from (Q x N).
Matrix collapse_abundances(const Matrix& per_atom, const GroupStructure& groups);

/// Per-pixel, per-group signatures formed as abundance-weighted averages of
/// the group's atoms. A group's signature is defined at a pixel only when its
/// collapsed abundance exceeds kGroupActiveThreshold there; undefined columns
/// are zero and flagged.
struct PerPixelEndmembers {
  int bands = 0;
  int group_count = 0;
  int pixels = 0;
  /// L x (P*N); the signature of group p at pixel k sits in column k*P + p.
  Matrix signatures;
  /// P x N flags marking which (group, pixel) signatures are defined.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> defined;

  Eigen::Index column(int group, int pixel) const {
    return static_cast<Eigen::Index>(pixel) * group_count + group;
  }
};

PerPixelEndmembers equivalent_endmembers(const EndmemberDictionary& dict,
                                         const Matrix& per_atom,
                                         const GroupStructure& groups);

/// Single-pixel variant: L x P signatures plus per-group defined flags for
/// column `pixel` of the abundance matrix.
std::pair<Matrix, std::vector<bool>> equivalent_endmembers_at(
    const EndmemberDictionary& dict, const Matrix& per_atom,
    const GroupStructure& groups, int pixel);

/// B * A, the model's image reconstruction.
Matrix reconstruct(const EndmemberDictionary& dict, const Matrix& per_atom);

}  // namespace hsi
