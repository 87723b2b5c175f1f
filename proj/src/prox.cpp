#include "hsi/prox.hpp"

#include "hsi/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hsi::prox {

double soft_threshold(double u, double tau) {
  double a = std::fabs(u) - tau;
  a = (a > 0.0) ? a : 0.0;
  return std::copysign(a, u);
}

void soft_threshold_inplace(Matrix& m, double tau) {
  kernels::soft_threshold(m.data(), m.data(), static_cast<std::size_t>(m.size()), tau);
}

Vector block_soft_threshold(const Vector& v, double tau) {
  const double norm = v.norm();
  if (norm <= tau) {
    return Vector::Zero(v.size());
  }
  return (1.0 - tau / norm) * v;
}

void prox_group_inplace(Matrix& m, const GroupStructure& groups, double tau) {
  if (m.rows() != groups.atom_count()) {
    throw DataError("prox input has " + std::to_string(m.rows()) +
                    " rows but the group structure covers " +
                    std::to_string(groups.atom_count()) + " atoms");
  }
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    for (int g = 0; g < groups.group_count(); ++g) {
      const auto& members = groups.members(g);
      double sq = 0.0;
      for (int atom : members) {
        sq += m(atom, k) * m(atom, k);
      }
      const double norm = std::sqrt(sq);
      if (norm <= tau) {
        for (int atom : members) {
          m(atom, k) = 0.0;
        }
      } else {
        const double f = 1.0 - tau / norm;
        for (int atom : members) {
          m(atom, k) *= f;
        }
      }
    }
  }
}

void prox_elitist_inplace(Matrix& m, const GroupStructure& groups, double tau) {
  if (m.rows() != groups.atom_count()) {
    throw DataError("prox input has " + std::to_string(m.rows()) +
                    " rows but the group structure covers " +
                    std::to_string(groups.atom_count()) + " atoms");
  }
  const double ratio = tau / (1.0 + tau);
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    for (int g = 0; g < groups.group_count(); ++g) {
      const auto& members = groups.members(g);
      double l1 = 0.0;
      for (int atom : members) {
        l1 += std::fabs(m(atom, k));
      }
      const double level = ratio * l1;
      for (int atom : members) {
        m(atom, k) = soft_threshold(m(atom, k), level);
      }
    }
  }
}

void prox_collaborative_rows_inplace(Matrix& m, double tau) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double norm = m.row(r).norm();
    if (norm <= tau) {
      m.row(r).setZero();
    } else {
      m.row(r) *= 1.0 - tau / norm;
    }
  }
}

double q_shrink(double u, double tau, double q) {
  if (q == 1.0) {
    return soft_threshold(u, tau);
  }
  const double mag = std::fabs(u);
  if (mag <= tau) {
    return 0.0;
  }
  // |u| - tau^(2-q) |u|^(q-1) factored as u (1 - (tau/|u|)^(2-q)), which
  // stays positive for |u| > tau instead of cancelling at the boundary.
  return u * (1.0 - std::pow(tau / mag, 2.0 - q));
}

void q_shrink_inplace(Matrix& m, double tau, double q) {
  if (q == 1.0) {
    soft_threshold_inplace(m, tau);
    return;
  }
  double* data = m.data();
  const std::size_t n = static_cast<std::size_t>(m.size());
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = q_shrink(data[i], tau, q);
  }
}

Vector project_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += sorted[static_cast<std::size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - t > 0.0) {
      theta = t;
    }
  }
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = v(i) - theta;
    out(i) = (x > 0.0) ? x : 0.0;
  }
  return out;
}

void project_simplex_columns_inplace(Matrix& m) {
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    m.col(k) = project_simplex(m.col(k));
  }
}

void project_nonneg_inplace(Matrix& m) {
  kernels::clamp_nonneg(m.data(), m.data(), static_cast<std::size_t>(m.size()));
}

namespace {

double group_norm_p(const Matrix& m, Eigen::Index col, const std::vector<int>& members,
                    double p) {
  if (p == 1.0) {
    double acc = 0.0;
    for (int atom : members) {
      acc += std::fabs(m(atom, col));
    }
    return acc;
  }
  if (p == 2.0) {
    double acc = 0.0;
    for (int atom : members) {
      acc += m(atom, col) * m(atom, col);
    }
    return std::sqrt(acc);
  }
  double acc = 0.0;
  for (int atom : members) {
    acc += std::pow(std::fabs(m(atom, col)), p);
  }
  return std::pow(acc, 1.0 / p);
}

void check_pq(double p, double q) {
  if (!(p > 0.0) || !(q > 0.0)) {
    throw ConfigError("mixed norm requires positive p and q");
  }
}

void check_rows(const Matrix& m, const GroupStructure& groups) {
  if (m.rows() != groups.atom_count()) {
    throw DataError("mixed norm input has " + std::to_string(m.rows()) +
                    " rows but the group structure covers " +
                    std::to_string(groups.atom_count()) + " atoms");
  }
}

double column_mixed_pow(const Matrix& m, Eigen::Index col, const GroupStructure& groups,
                        double p, double q) {
  double acc = 0.0;
  for (int g = 0; g < groups.group_count(); ++g) {
    acc += std::pow(group_norm_p(m, col, groups.members(g), p), q);
  }
  return acc;
}

}  // namespace

double mixed_norm(const Vector& v, const GroupStructure& groups, double p, double q) {
  check_pq(p, q);
  const Matrix m = v;
  check_rows(m, groups);
  return std::pow(column_mixed_pow(m, 0, groups, p, q), 1.0 / q);
}

double mixed_norm(const Matrix& m, const GroupStructure& groups, double p, double q) {
  check_pq(p, q);
  check_rows(m, groups);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    acc += std::pow(column_mixed_pow(m, k, groups, p, q), 1.0 / q);
  }
  return acc;
}

double mixed_norm_pow(const Vector& v, const GroupStructure& groups, double p, double q) {
  check_pq(p, q);
  const Matrix m = v;
  check_rows(m, groups);
  return column_mixed_pow(m, 0, groups, p, q);
}

double mixed_norm_pow(const Matrix& m, const GroupStructure& groups, double p, double q) {
  check_pq(p, q);
  check_rows(m, groups);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    acc += column_mixed_pow(m, k, groups, p, q);
  }
  return acc;
}

}  // namespace hsi::prox
