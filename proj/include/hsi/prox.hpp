#pragma once

#include "hsi/types.hpp"

namespace hsi::prox {

/// sign(u) * max(|u| - tau, 0), elementwise.
double soft_threshold(double u, double tau);
void soft_threshold_inplace(Matrix& m, double tau);

/// max(1 - tau/||v||, 0) * v, with 0 mapped to 0.
Vector block_soft_threshold(const Vector& v, double tau);

/// Block soft threshold applied to each group's subvector, columnwise.
void prox_group_inplace(Matrix& m, const GroupStructure& groups, double tau);

/// Per group, soft threshold with the data-dependent level
/// tau/(1+tau) * ||v_group||_1, columnwise.
void prox_elitist_inplace(Matrix& m, const GroupStructure& groups, double tau);

/// Block soft threshold applied to each row of the matrix.
void prox_collaborative_rows_inplace(Matrix& m, double tau);

/// Shrinkage for the q-th power penalty, 0 < q <= 1:
/// sign(u) * max(|u| - tau^(2-q) |u|^(q-1), 0), which zeroes exactly the
/// band |u| <= tau and reduces to the soft threshold at q = 1.
double q_shrink(double u, double tau, double q);
void q_shrink_inplace(Matrix& m, double tau, double q);

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
Vector project_simplex(const Vector& v);
void project_simplex_columns_inplace(Matrix& m);

/// Euclidean projection onto the nonnegative orthant.
void project_nonneg_inplace(Matrix& m);

/// (sum_i ||v_{G_i}||_p^q)^(1/q) for a vector; for a matrix, the sum of the
/// per-column values.
double mixed_norm(const Vector& v, const GroupStructure& groups, double p, double q);
double mixed_norm(const Matrix& m, const GroupStructure& groups, double p, double q);

/// sum_i ||v_{G_i}||_p^q, the q-th power of the mixed norm, without the final
/// root; for a matrix, summed over columns.
double mixed_norm_pow(const Vector& v, const GroupStructure& groups, double p, double q);
double mixed_norm_pow(const Matrix& m, const GroupStructure& groups, double p, double q);

}  // namespace hsi::prox
