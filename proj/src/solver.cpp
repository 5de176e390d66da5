#include "rtmix/solver.hpp"

#include "rtmix/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>

namespace rtmix {

struct Factorization::Impl {
  SparseMatrix A;  // [[M, B], [-B^T, d_scale D]], the matrix the contract refers to
  double a_norm_inf = 0.0;
  bool regularized = false;  // LDL^T of a perturbed matrix; refinement recovers the exact solve
  std::unique_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt;
  int n_rt = 0;

  // Approximate inverse of A applied to b.
  Eigen::VectorXd apply(const Eigen::VectorXd& b) const {
    if (lu) return lu->solve(b);
    Eigen::VectorXd bs = b;
    bs.head(n_rt) = -bs.head(n_rt);
    return ldlt->solve(bs);
  }
};

namespace {

double norm_inf(const SparseMatrix& A) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

Factorization::Factorization(const SaddleSystem& system, double d_scale, SolverBackend backend)
    : impl_(std::make_unique<Impl>()), n_rt_(system.n_rt()), n_dg_(system.n_dg()), backend_(backend) {
  if (!(d_scale >= 0.0) || !std::isfinite(d_scale)) throw InvalidArgument("D scaling must be finite and non-negative");
  impl_->n_rt = n_rt_;
  impl_->A = system.step_matrix(d_scale);
  impl_->A.makeCompressed();
  impl_->a_norm_inf = norm_inf(impl_->A);
  if (backend == SolverBackend::lu) {
    impl_->lu = std::make_unique<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
    impl_->lu->compute(impl_->A);
    if (impl_->lu->info() != Eigen::Success) {
      throw SolvabilityError("sparse LU factorization failed: " + impl_->lu->lastErrorMessage());
    }
  } else {
    impl_->regularized = !(d_scale > 0.0);
    SparseMatrix S = system.symmetric_step_matrix(d_scale > 0.0 ? d_scale : kRegularization);
    impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>>();
    impl_->ldlt->compute(S);
    if (impl_->ldlt->info() != Eigen::Success) throw SolvabilityError("sparse LDL^T factorization failed");
  }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

double Factorization::scaled_residual(const Eigen::VectorXd& sigma, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& rhs_sigma, const Eigen::VectorXd& rhs_u) const {
  Eigen::VectorXd x(n_rt_ + n_dg_), b(n_rt_ + n_dg_);
  x << sigma, u;
  b << rhs_sigma, rhs_u;
  const Eigen::VectorXd r = impl_->A * x - b;
  const double den = impl_->a_norm_inf * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  return den > 0.0 ? r.lpNorm<Eigen::Infinity>() / den : r.lpNorm<Eigen::Infinity>();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Factorization::solve(const Eigen::VectorXd& rhs_sigma,
                                                                 const Eigen::VectorXd& rhs_u) const {
  if (rhs_sigma.size() != n_rt_ || rhs_u.size() != n_dg_) {
    throw InvalidArgument("Factorization::solve: rhs dimensions (" + std::to_string(rhs_sigma.size()) + ", " +
                          std::to_string(rhs_u.size()) + ") do not match (" + std::to_string(n_rt_) + ", " +
                          std::to_string(n_dg_) + ")");
  }
  Eigen::VectorXd b(n_rt_ + n_dg_);
  b << rhs_sigma, rhs_u;
  const double b_norm = b.lpNorm<Eigen::Infinity>();
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r = b - impl_->A * x;
    const double den = impl_->a_norm_inf * x.lpNorm<Eigen::Infinity>() + b_norm;
    return den > 0.0 ? r.lpNorm<Eigen::Infinity>() / den : r.lpNorm<Eigen::Infinity>();
  };

  Eigen::VectorXd x = impl_->apply(b);
  Eigen::VectorXd r;
  double res = residual(x, r);
  // The regularized factorization is refined until the residual stops
  // decreasing; the exact ones get at most one extra sweep.
  const bool regularized = impl_->regularized;
  const double target = regularized ? 0.0 : kResidualTolerance;
  const int max_sweeps = regularized ? kMaxRefinements : 1;
  int sweeps = 0;
  while (!(res <= target) && sweeps < max_sweeps && std::isfinite(res)) {
    const Eigen::VectorXd candidate = x + impl_->apply(r);
    Eigen::VectorXd r_candidate;
    const double next = residual(candidate, r_candidate);
    ++sweeps;
    if (!(next < res)) break;
    x = candidate;
    r = std::move(r_candidate);
    res = next;
  }
  last_refinements_ = sweeps;
  if (!(res < kResidualTolerance)) {
    throw SolvabilityError("saddle solve residual " + std::to_string(res) + " exceeds tolerance");
  }
  return {x.head(n_rt_), x.tail(n_dg_)};
}

Factorization factor(const SaddleSystem& system, SolverBackend backend) {
  return Factorization(system, 1.0 / system.tau, backend);
}

}  // namespace rtmix
