#pragma once

#include "rtmix/assembly.hpp"

#include <Eigen/Core>

#include <memory>
#include <utility>

namespace rtmix {

enum class SolverBackend {
  ldlt,  ///< sparse LDL^T of the quasi-definite form [[-M, -B], [-B^T, s D]]
  lu,    ///< sparse LU of [[M, B], [-B^T, s D]] (supernodal, COLAMD ordering)
};

/// Reusable sparse direct factorization of the saddle-point step matrix
///   [[M, B], [-B^T, d_scale * D]].
/// Every solve is checked against the scaled residual contract
///   ||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf) < 1e-10.
///
/// The LDL^T backend needs d_scale > 0 for a quasi-definite matrix. For
/// d_scale = 0 it factors the matrix with d_scale = kRegularization and
/// recovers the exact solution by iterative refinement against the true
/// matrix; each sweep contracts the error by roughly kRegularization / pi^2.
class Factorization {
 public:
  Factorization(const SaddleSystem& system, double d_scale, SolverBackend backend = SolverBackend::ldlt);
  ~Factorization();
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve(const Eigen::VectorXd& rhs_sigma, const Eigen::VectorXd& rhs_u) const;

  int n_rt() const { return n_rt_; }
  int n_dg() const { return n_dg_; }
  SolverBackend backend() const { return backend_; }
  /// Scaled residual of [[M, B], [-B^T, d_scale D]] (sigma, u) against (rhs_sigma, rhs_u).
  double scaled_residual(const Eigen::VectorXd& sigma, const Eigen::VectorXd& u, const Eigen::VectorXd& rhs_sigma,
                         const Eigen::VectorXd& rhs_u) const;
  /// Refinement sweeps attempted by the most recent solve.
  int last_refinements() const { return last_refinements_; }

  static constexpr double kResidualTolerance = 1e-10;
  static constexpr double kRegularization = 1e-4;
  static constexpr int kMaxRefinements = 20;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_rt_ = 0;
  int n_dg_ = 0;
  SolverBackend backend_;
  mutable int last_refinements_ = 0;
};

/// Factorization of the time-step matrix (d_scale = 1/tau).
Factorization factor(const SaddleSystem& system, SolverBackend backend = SolverBackend::ldlt);

}  // namespace rtmix
