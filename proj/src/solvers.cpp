#include "hsi/solvers.hpp"

#include "hsi/kernels/kernels.hpp"
#include "hsi/prox.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

namespace hsi {

namespace {

double frob_sq(const Matrix& m) {
  return kernels::sum_sq(m.data(), static_cast<std::size_t>(m.size()));
}

double frob_sq_diff(const Matrix& a, const Matrix& b) {
  return kernels::sum_sq_diff(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

double penalty_functional(const Matrix& v, const GroupStructure* groups,
                          const SolverConfig& cfg) {
  switch (cfg.penalty) {
    case Penalty::none:
      return 0.0;
    case Penalty::l1:
      return kernels::sum_abs(v.data(), static_cast<std::size_t>(v.size()));
    case Penalty::collaborative: {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < v.rows(); ++r) {
        acc += v.row(r).norm();
      }
      return acc;
    }
    case Penalty::group:
      return prox::mixed_norm(v, *groups, 2.0, 1.0);
    case Penalty::elitist:
      return prox::mixed_norm(v, *groups, 1.0, 2.0);
    case Penalty::fractional:
      return prox::mixed_norm_pow(v, *groups, 1.0, cfg.fraction);
  }
  return 0.0;
}

SolverReport run_admm(const Matrix& X, const Matrix& B, const GroupStructure* groups,
                      const SolverConfig& cfg, const SolveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index Q = B.cols();
  const Eigen::Index N = X.cols();
  const double rho = cfg.rho;

  const bool fractional = cfg.penalty == Penalty::fractional;
  const bool has_penalty_split = cfg.penalty != Penalty::none;
  const bool sum_to_one = cfg.penalty != Penalty::l1;

  Matrix M;
  if (fractional) {
    M = groups->indicator_matrix();
  }

  Matrix system = B.transpose() * B;
  if (fractional) {
    system.noalias() += rho * (M.transpose() * M);
    system.diagonal().array() += rho;
  } else if (has_penalty_split) {
    system.diagonal().array() += 2.0 * rho;
  } else {
    system.diagonal().array() += rho;
  }
  const Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw SolverDivergence("normal equations factorization failed", 0);
  }

  const Matrix BtX = B.transpose() * X;

  Matrix A = Matrix::Constant(Q, N, 1.0 / static_cast<double>(Q));
  Matrix V = A;
  Matrix D = Matrix::Zero(Q, N);
  Matrix U, C, collapsed;
  if (has_penalty_split) {
    collapsed = fractional ? Matrix(M * A) : A;
    U = collapsed;
    C = Matrix::Zero(collapsed.rows(), collapsed.cols());
  }

  const double tau = has_penalty_split ? cfg.lambda / rho : 0.0;

  SolverReport report;
  report.history.reserve(static_cast<std::size_t>(cfg.max_iter));
  if (opts.track_objective) {
    report.objective_history.reserve(static_cast<std::size_t>(cfg.max_iter));
  }

  Matrix A_prev = A;
  Matrix rhs(Q, N);
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    A_prev = A;

    rhs = BtX;
    if (fractional) {
      rhs.noalias() += rho * (M.transpose() * (U + C));
      rhs += rho * (V + D);
    } else if (has_penalty_split) {
      rhs += rho * (U + V + C + D);
    } else {
      rhs += rho * (V + D);
    }
    A = llt.solve(rhs);
    if (!A.allFinite()) {
      throw SolverDivergence("abundance iterate became non-finite", iter);
    }

    if (has_penalty_split) {
      if (fractional) {
        collapsed.noalias() = M * A;
      } else {
        collapsed = A;
      }
      U = collapsed - C;
      switch (cfg.penalty) {
        case Penalty::l1:
          prox::soft_threshold_inplace(U, tau);
          break;
        case Penalty::collaborative:
          prox::prox_collaborative_rows_inplace(U, tau);
          break;
        case Penalty::group:
          prox::prox_group_inplace(U, *groups, tau);
          break;
        case Penalty::elitist:
          prox::prox_elitist_inplace(U, *groups, tau);
          break;
        case Penalty::fractional:
          prox::q_shrink_inplace(U, tau, cfg.fraction);
          break;
        default:
          break;
      }
    }

    V = A - D;
    if (sum_to_one) {
      prox::project_simplex_columns_inplace(V);
    } else {
      prox::project_nonneg_inplace(V);
    }

    if (has_penalty_split) {
      C += U - collapsed;
    }
    D += V - A;

    IterationRecord rec;
    const double denom = std::sqrt(frob_sq(A_prev));
    rec.rel_change = std::sqrt(frob_sq_diff(A, A_prev)) / std::max(denom, 1e-12);
    rec.residual_u = has_penalty_split ? std::sqrt(frob_sq_diff(U, collapsed)) : 0.0;
    rec.residual_v = std::sqrt(frob_sq_diff(V, A));
    report.history.push_back(rec);

    if (opts.track_objective) {
      const double fit = 0.5 * frob_sq_diff(X, Matrix(B * V));
      report.objective_history.push_back(
          fit + cfg.lambda * penalty_functional(V, groups, cfg));
    }

    report.iterations = iter;
    report.final_rel_change = rec.rel_change;
    if (rec.rel_change < cfg.rel_tol) {
      report.converged = true;
      break;
    }
  }

  report.abundances = V;
  report.primal = A;
  report.data_fit = 0.5 * frob_sq_diff(X, Matrix(B * V));
  report.penalty_value = penalty_functional(V, groups, cfg);
  report.objective = report.data_fit + cfg.lambda * report.penalty_value;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

SolverReport run_checked(const SpectralImage& image, const EndmemberDictionary& dict,
                         const GroupStructure* groups, const SolverConfig& cfg,
                         const SolveOptions& opts) {
  cfg.validate();
  if (image.bands() != dict.bands()) {
    throw DataError("image has " + std::to_string(image.bands()) +
                    " bands but the dictionary has " + std::to_string(dict.bands()));
  }
  if (penalty_needs_groups(cfg.penalty)) {
    if (groups == nullptr) {
      throw ConfigError(std::string("penalty '") + penalty_name(cfg.penalty) +
                        "' requires a group structure");
    }
    if (groups->atom_count() != dict.atoms()) {
      throw DataError("group structure covers " +
                      std::to_string(groups->atom_count()) +
                      " atoms but the dictionary has " +
                      std::to_string(dict.atoms()));
    }
  }
  return run_admm(image.data(), dict.signatures(), groups, cfg, opts);
}

SolverConfig with_penalty(SolverConfig cfg, Penalty p) {
  cfg.penalty = p;
  return cfg;
}

}  // namespace

SolverReport solve_fclsu(const SpectralImage& image, const EndmemberDictionary& dict,
                         const SolverConfig& config, const SolveOptions& options) {
  return run_checked(image, dict, nullptr, with_penalty(config, Penalty::none), options);
}

SolverReport solve_l1(const SpectralImage& image, const EndmemberDictionary& dict,
                      const SolverConfig& config, const SolveOptions& options) {
  return run_checked(image, dict, nullptr, with_penalty(config, Penalty::l1), options);
}

SolverReport solve_collaborative(const SpectralImage& image,
                                 const EndmemberDictionary& dict,
                                 const SolverConfig& config,
                                 const SolveOptions& options) {
  return run_checked(image, dict, nullptr, with_penalty(config, Penalty::collaborative),
                     options);
}

SolverReport solve_group(const SpectralImage& image, const EndmemberDictionary& dict,
                         const GroupStructure& groups, const SolverConfig& config,
                         const SolveOptions& options) {
  return run_checked(image, dict, &groups, with_penalty(config, Penalty::group), options);
}

SolverReport solve_elitist(const SpectralImage& image, const EndmemberDictionary& dict,
                           const GroupStructure& groups, const SolverConfig& config,
                           const SolveOptions& options) {
  return run_checked(image, dict, &groups, with_penalty(config, Penalty::elitist),
                     options);
}

SolverReport solve_fractional(const SpectralImage& image,
                              const EndmemberDictionary& dict,
                              const GroupStructure& groups, const SolverConfig& config,
                              const SolveOptions& options) {
  return run_checked(image, dict, &groups, with_penalty(config, Penalty::fractional),
                     options);
}

SolverReport solve(const SpectralImage& image, const EndmemberDictionary& dict,
                   const GroupStructure* groups, const SolverConfig& config,
                   const SolveOptions& options) {
  return run_checked(image, dict, groups, config, options);
}

}  // namespace hsi
