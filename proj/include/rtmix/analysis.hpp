#pragma once

#include "rtmix/assembly.hpp"
#include "rtmix/spaces.hpp"
#include "rtmix/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rtmix {

struct RunConfig;

/// One row of a study: errors, norms and embedding ratios of a single run.
/// Ratios are empty when the denominator vanishes.
struct StudyRecord {
  std::string label;
  int M = 0;
  int r = 0;
  double tau = 0.0;
  long steps = 0;
  std::optional<double> err_u_L2;
  std::optional<double> err_sigma_L2;
  /// tau * sum_m ||sigma^m - sigma_h^m||^2 over all steps
  std::optional<double> accumulated_flux_error;
  double sigma_L2 = 0.0;
  double dg_norm = 0.0;
  std::map<int, double> lp_norms;
  std::map<int, std::optional<double>> embed_ratio;      ///< ||u_h||_Lp / ||sigma_h||_L2
  std::map<int, std::optional<double>> lp_over_dg;       ///< ||u_h||_Lp / ||u_h||_DG
  std::optional<double> dg_over_sigma;                   ///< ||u_h||_DG / ||sigma_h||_L2
  double chain_dg_squared = 0.0;                         ///< ||u_h||_DG^2
  double chain_sigma_chi = 0.0;                          ///< (sigma_h, chi_h)
  std::optional<double> projection_lp6_bound;            ///< ||P sigma(0)||_L6 + ||P u(0)||_L6
  double max_first_equation_residual = 0.0;
  double wall_time = 0.0;
};

struct ConvergenceReport {
  std::vector<StudyRecord> records;  ///< ordered by M
  std::vector<std::optional<double>> order_u;      ///< per record; empty on the first
  std::vector<std::optional<double>> order_sigma;
  std::optional<double> final_order_u;      ///< between the two finest levels
  std::optional<double> final_order_sigma;
  std::optional<double> fit_order_u;        ///< least-squares slope over all levels
  std::optional<double> fit_order_sigma;
};

inline constexpr int kDefaultPList[] = {2, 3, 4, 6};

/// Quadrature degree used for L2 errors and norms.
inline int error_quad_degree(int r) { return 2 * r + 6; }

double l2_error(const DgField& field, const SpaceTimeScalar& exact, double t);
double l2_error(const RtField& field, const SpaceTimeVector& exact, double t);
double l2_norm(const DgField& field);
double l2_norm(const RtField& field);

/// Broken H1 norm: cell gradients plus 1/h_F-weighted squared face jumps
/// (boundary jumps are the one-sided trace).
double dg_norm(const DgField& u);

/// (sum_K int_K |u_h|^p)^(1/p) for p in {2, 3, 4, 6}.
double lp_norm(const DgField& u, int p);
double lp_norm(const RtField& sigma, int p);

/// Pieces of the DG-norm bound: chi_h is built cell by cell with the local
/// RT projection from (grad u_h, -[[u_h]]/h_F), so that
/// ||u_h||_DG^2 = (sigma_h, chi_h) whenever (sigma_h, u_h) satisfy the
/// first mixed equation.
struct EmbeddingChain {
  double dg_squared = 0.0;
  double sigma_dot_chi = 0.0;
  double chi_l2 = 0.0;
  double conformity_defect = 0.0;  ///< max mismatch of shared face DOFs of chi_h
  RtField chi;
};

EmbeddingChain embedding_chain(const DgField& u, const RtField& sigma);

/// ||M sigma + B u||_inf
double first_equation_residual(const SaddleSystem& system, const RtField& sigma, const DgField& u);

/// Fills norms and ratios of a record from scheme output.
void record_embedding(StudyRecord& rec, const DgField& u, const RtField& sigma, std::span<const int> p_list);

/// log2(e_M / e_2M) per consecutive pair; throws InvalidArgument unless M doubles.
ConvergenceReport convergence_orders(std::vector<StudyRecord> records);

/// Runs each configuration and tabulates norms and embedding ratios.
ConvergenceReport embedding_study(const std::vector<RunConfig>& configs, std::span<const int> p_list);

}  // namespace rtmix
