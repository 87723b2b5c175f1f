#include "hsi/core.hpp"

namespace hsi {

namespace {

void check_atoms(const Matrix& per_atom, const GroupStructure& groups) {
  if (per_atom.rows() != groups.atom_count()) {
    throw DataError("abundance matrix has " + std::to_string(per_atom.rows()) +
                    " rows but the group structure covers " +
                    std::to_string(groups.atom_count()) + " atoms");
  }
}

}  // namespace

Matrix collapse_abundances(const Matrix& per_atom, const GroupStructure& groups) {
  check_atoms(per_atom, groups);
  Matrix collapsed = Matrix::Zero(groups.group_count(), per_atom.cols());
  for (int atom = 0; atom < groups.atom_count(); ++atom) {
    collapsed.row(groups.group_of(atom)) += per_atom.row(atom);
  }
  return collapsed;
}

PerPixelEndmembers equivalent_endmembers(const EndmemberDictionary& dict,
                                         const Matrix& per_atom,
                                         const GroupStructure& groups) {
  check_atoms(per_atom, groups);
  if (dict.atoms() != groups.atom_count()) {
    throw DataError("dictionary has " + std::to_string(dict.atoms()) +
                    " atoms but the group structure covers " +
                    std::to_string(groups.atom_count()));
  }
  const int L = dict.bands();
  const int P = groups.group_count();
  const int N = static_cast<int>(per_atom.cols());

  PerPixelEndmembers out;
  out.bands = L;
  out.group_count = P;
  out.pixels = N;
  out.signatures = Matrix::Zero(L, static_cast<Eigen::Index>(P) * N);
  out.defined.setConstant(P, N, false);

  const Matrix collapsed = collapse_abundances(per_atom, groups);
  for (int k = 0; k < N; ++k) {
    for (int p = 0; p < P; ++p) {
      const double total = collapsed(p, k);
      if (total <= kGroupActiveThreshold) {
        continue;
      }
      Vector s = Vector::Zero(L);
      for (int atom : groups.members(p)) {
        s += per_atom(atom, k) * dict.signatures().col(atom);
      }
      out.signatures.col(out.column(p, k)) = s / total;
      out.defined(p, k) = true;
    }
  }
  return out;
}

std::pair<Matrix, std::vector<bool>> equivalent_endmembers_at(
    const EndmemberDictionary& dict, const Matrix& per_atom,
    const GroupStructure& groups, int pixel) {
  check_atoms(per_atom, groups);
  if (pixel < 0 || pixel >= per_atom.cols()) {
    throw DataError("pixel " + std::to_string(pixel) + " out of range 0.." +
                    std::to_string(per_atom.cols() - 1));
  }
  const int P = groups.group_count();
  Matrix s = Matrix::Zero(dict.bands(), P);
  std::vector<bool> defined(static_cast<std::size_t>(P), false);
  for (int p = 0; p < P; ++p) {
    double total = 0.0;
    for (int atom : groups.members(p)) {
      total += per_atom(atom, pixel);
    }
    if (total <= kGroupActiveThreshold) {
      continue;
    }
    Vector acc = Vector::Zero(dict.bands());
    for (int atom : groups.members(p)) {
      acc += per_atom(atom, pixel) * dict.signatures().col(atom);
    }
    s.col(p) = acc / total;
    defined[static_cast<std::size_t>(p)] = true;
  }
  return {std::move(s), std::move(defined)};
}

Matrix reconstruct(const EndmemberDictionary& dict, const Matrix& per_atom) {
  if (dict.atoms() != per_atom.rows()) {
    throw DataError("dictionary has " + std::to_string(dict.atoms()) +
                    " atoms but abundances have " +
                    std::to_string(per_atom.rows()) + " rows");
  }
  return dict.signatures() * per_atom;
}

}  // namespace hsi
