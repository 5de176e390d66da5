#include "rtmix/projection.hpp"

#include "rtmix/errors.hpp"

namespace rtmix {

EllipticProjector::EllipticProjector(const SaddleSystem& system)
    : rt_(system.rt), dg_(system.dg), fact_(system, 0.0, SolverBackend::ldlt) {}

std::pair<RtField, DgField> EllipticProjector::project_moments(const Eigen::VectorXd& div_moments) const {
  if (div_moments.size() != dg_->n_dofs()) throw InvalidArgument("project_moments: wrong moment vector length");
  // second block row reads -B^T sigma = -(div sigma, psi)
  auto [sigma, u] = fact_.solve(Eigen::VectorXd::Zero(rt_->n_dofs()), -div_moments);
  return {RtField(rt_, std::move(sigma)), DgField(dg_, std::move(u))};
}

std::pair<RtField, DgField> EllipticProjector::project(const ExactSolutionSpec& exact, double t) const {
  if (!exact.laplace_u) throw InvalidArgument("elliptic projection needs laplace_u");
  auto [sigma, u] = project_moments(assemble_source(dg_, exact.laplace_u, t));
  sigma.time = t;
  u.time = t;
  return {std::move(sigma), std::move(u)};
}

std::pair<RtField, DgField> elliptic_project(const SaddleSystem& system, const ExactSolutionSpec& exact, double t) {
  return EllipticProjector(system).project(exact, t);
}

std::pair<RtField, DgField> initial_data(const SaddleSystem& system, const ExactSolutionSpec& exact) {
  return elliptic_project(system, exact, 0.0);
}

}  // namespace rtmix
