#pragma once

#include "rtmix/quadrature.hpp"
#include "rtmix/spaces.hpp"
#include "rtmix/types.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

namespace rtmix {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Which lower-order terms f(u, sigma) the scheme carries:
///   advection:    (b . sigma) u
///   cubic:        u^3
///   linear_shift: -u
struct NonlinearitySpec {
  bool advection = false;
  SmallVec b;  ///< empty means the all-ones vector
  bool cubic = false;
  bool linear_shift = false;

  SmallVec advection_vector(int dim) const;
  double evaluate(double u, const SmallVec& sigma) const;
  bool any() const { return advection || cubic || linear_shift; }
};

/// Blocks of the mixed system
///   M sigma + B u            = rhs_sigma
///   -B^T sigma + (1/tau) D u = rhs_u
/// with M_ij = (phi_j, phi_i), B_ik = (psi_k, div phi_i), D_kl = (psi_l, psi_k).
struct SaddleSystem {
  std::shared_ptr<const RtSpace> rt;
  std::shared_ptr<const DgSpace> dg;
  SparseMatrix M;
  SparseMatrix B;
  SparseMatrix D;
  double tau = 0.0;

  int n_rt() const { return static_cast<int>(M.rows()); }
  int n_dg() const { return static_cast<int>(D.rows()); }
  /// [[M, B], [-B^T, d_scale D]]
  SparseMatrix step_matrix(double d_scale) const;
  /// [[-M, -B], [-B^T, d_scale D]], symmetric
  SparseMatrix symmetric_step_matrix(double d_scale) const;
};

/// Assembles M, B and D. `cell_order`, when given, is the permutation in
/// which cells are visited.
SaddleSystem assemble_saddle(std::shared_ptr<const RtSpace> rt, std::shared_ptr<const DgSpace> dg, double tau,
                             std::span<const int> cell_order = {});

/// Cached quadrature/tabulation data for repeated load-vector assembly on a
/// DG space (and, for the advection term, an RT space).
class LoadAssembler {
 public:
  LoadAssembler(std::shared_ptr<const DgSpace> dg, std::shared_ptr<const RtSpace> rt, int quad_degree);

  /// Entries (f(u_prev, sigma_prev), psi_k).
  Eigen::VectorXd nonlinear(const DgField& u_prev, const RtField& sigma_prev, const NonlinearitySpec& spec);
  /// Entries (g(., t), psi_k).
  Eigen::VectorXd source(const SpaceTimeScalar& g, double t);
  /// Entries (h, psi_k) for pointwise values h[cell][q] at this assembler's points.
  Eigen::VectorXd moments(std::vector<double>& values) const;

  const QuadratureRule& rule() const { return rule_; }
  /// Physical quadrature points, cell-major.
  const std::vector<Point>& points() const { return points_; }
  /// Values of a DG field at every quadrature point (cells x points, row-major).
  void dg_values(const DgField& u, std::vector<double>& out) const;

 private:
  std::shared_ptr<const DgSpace> dg_;
  std::shared_ptr<const RtSpace> rt_;
  QuadratureRule rule_;
  Tabulation dg_tab_;
  Tabulation rt_tab_;
  std::vector<Point> points_;
  std::vector<double> scratch_u_, scratch_f_, scratch_s_, scratch_coef_;
};

Eigen::VectorXd assemble_nonlinear_load(std::shared_ptr<const DgSpace> dg, std::shared_ptr<const RtSpace> rt,
                                        const DgField& u_prev, const RtField& sigma_prev,
                                        const NonlinearitySpec& spec);

Eigen::VectorXd assemble_source(std::shared_ptr<const DgSpace> dg, const SpaceTimeScalar& g, double t);

/// Quadrature degrees used by the assembly routines.
inline int matrix_quad_degree(int r) { return 2 * r + 2; }
inline int nonlinear_quad_degree(int r) { return 3 * r + 2; }
inline int source_quad_degree(int r) { return std::max(2 * r + 6, 12); }

}  // namespace rtmix
