#pragma once

#include "rtmix/assembly.hpp"
#include "rtmix/solver.hpp"
#include "rtmix/spaces.hpp"
#include "rtmix/types.hpp"

#include <utility>

namespace rtmix {

/// Exact solution callbacks for a manufactured problem with u = 0 on the
/// boundary.
struct ExactSolutionSpec {
  SpaceTimeScalar u;
  SpaceTimeVector grad_u;
  SpaceTimeScalar laplace_u;
  SpaceTimeScalar u_t;
};

/// The mixed elliptic projection onto RT_r x V_r:
///   (P sigma, chi) + (P u, div chi) = 0     for all chi
///   (div P sigma, v)               = (div sigma, v) for all v
class EllipticProjector {
 public:
  explicit EllipticProjector(const SaddleSystem& system);

  /// Projection of the exact pair at time t; div sigma is taken as laplace_u.
  std::pair<RtField, DgField> project(const ExactSolutionSpec& exact, double t) const;
  /// Projection for given divergence moments (div sigma, psi_k).
  std::pair<RtField, DgField> project_moments(const Eigen::VectorXd& div_moments) const;

  const Factorization& factorization() const { return fact_; }

 private:
  std::shared_ptr<const RtSpace> rt_;
  std::shared_ptr<const DgSpace> dg_;
  Factorization fact_;
};

std::pair<RtField, DgField> elliptic_project(const SaddleSystem& system, const ExactSolutionSpec& exact, double t);

/// (sigma_h^0, u_h^0) = elliptic projection of the exact solution at t = 0.
std::pair<RtField, DgField> initial_data(const SaddleSystem& system, const ExactSolutionSpec& exact);

}  // namespace rtmix
