#pragma once

#include "hsi/types.hpp"

#include <vector>

namespace hsi {

struct IterationRecord {
  double rel_change = 0.0;
  /// Frobenius gap between the penalty split variable and its target.
  double residual_u = 0.0;
  /// Frobenius gap between the constraint split variable and the primal.
  double residual_v = 0.0;
};

struct SolverReport {
  /// Feasible abundances: the constraint-projected iterate, Q x N.
  Matrix abundances;
  /// Raw primal iterate, Q x N. Convergence is measured on this.
  Matrix primal;
  int iterations = 0;
  bool converged = false;
  double final_rel_change = 0.0;
  std::vector<IterationRecord> history;
  /// 0.5 * ||X - B * abundances||_F^2 at exit.
  double data_fit = 0.0;
  /// Penalty functional evaluated on the returned abundances (without lambda).
  double penalty_value = 0.0;
  /// data_fit + lambda * penalty_value.
  double objective = 0.0;
  double wall_time_seconds = 0.0;
  /// Per-iteration objective on the feasible iterate; filled only when
  /// SolveOptions::track_objective is set.
  std::vector<double> objective_history;
};

struct SolveOptions {
  bool track_objective = false;
};

/// Fully constrained least squares: nonnegative, sum-to-one, no penalty.
SolverReport solve_fclsu(const SpectralImage& image, const EndmemberDictionary& dict,
                         const SolverConfig& config, const SolveOptions& options = {});

/// Entrywise l1 penalty under nonnegativity alone (no sum-to-one, which the
/// penalty would otherwise fix to a constant).
SolverReport solve_l1(const SpectralImage& image, const EndmemberDictionary& dict,
                      const SolverConfig& config, const SolveOptions& options = {});

/// Row-wise l2 penalty (l2,1 over dictionary atoms), shared across pixels.
SolverReport solve_collaborative(const SpectralImage& image,
                                 const EndmemberDictionary& dict,
                                 const SolverConfig& config,
                                 const SolveOptions& options = {});

/// Group-sparse penalty: per-column sum of group l2 norms.
SolverReport solve_group(const SpectralImage& image, const EndmemberDictionary& dict,
                         const GroupStructure& groups, const SolverConfig& config,
                         const SolveOptions& options = {});

/// Elitist penalty: per-column l2 norm of group l1 norms, promoting sparsity
/// inside each group.
SolverReport solve_elitist(const SpectralImage& image, const EndmemberDictionary& dict,
                           const GroupStructure& groups, const SolverConfig& config,
                           const SolveOptions& options = {});

/// Fractional penalty: per-column sum of group l1 norms raised to q in (0,1],
/// handled through a split on collapsed group abundances.
SolverReport solve_fractional(const SpectralImage& image,
                              const EndmemberDictionary& dict,
                              const GroupStructure& groups, const SolverConfig& config,
                              const SolveOptions& options = {});

/// Dispatches on config.penalty; groups may be null for none, l1 and
/// collaborative and is required otherwise.
SolverReport solve(const SpectralImage& image, const EndmemberDictionary& dict,
                   const GroupStructure* groups, const SolverConfig& config,
                   const SolveOptions& options = {});

}  // namespace hsi
