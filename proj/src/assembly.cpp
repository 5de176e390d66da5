#include "rtmix/assembly.hpp"

#include "rtmix/errors.hpp"
#include "rtmix/kernels.hpp"

#include <numeric>

namespace rtmix {

SmallVec NonlinearitySpec::advection_vector(int dim) const {
  if (b.size() == 0) return SmallVec::Ones(dim);
  if (b.size() != dim) throw InvalidArgument("advection vector b has wrong dimension");
  return b;
}

double NonlinearitySpec::evaluate(double u, const SmallVec& sigma) const {
  double f = 0.0;
  if (advection) f += advection_vector(static_cast<int>(sigma.size())).dot(sigma) * u;
  if (cubic) f += u * u * u;
  if (linear_shift) f -= u;
  return f;
}

SparseMatrix SaddleSystem::step_matrix(double d_scale) const {
  const int nr = n_rt();
  const int nd = n_dg();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(M.nonZeros() + 2 * B.nonZeros() + D.nonZeros());
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(it.row(), nr + it.col(), it.value());
      t.emplace_back(nr + it.col(), it.row(), -it.value());
    }
  if (d_scale != 0.0) {
    for (int k = 0; k < D.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(D, k); it; ++it) t.emplace_back(nr + it.row(), nr + it.col(), d_scale * it.value());
  }
  SparseMatrix A(nr + nd, nr + nd);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SparseMatrix SaddleSystem::symmetric_step_matrix(double d_scale) const {
  const int nr = n_rt();
  const int nd = n_dg();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(M.nonZeros() + 2 * B.nonZeros() + D.nonZeros());
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) t.emplace_back(it.row(), it.col(), -it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(it.row(), nr + it.col(), -it.value());
      t.emplace_back(nr + it.col(), it.row(), -it.value());
    }
  if (d_scale != 0.0) {
    for (int k = 0; k < D.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(D, k); it; ++it) t.emplace_back(nr + it.row(), nr + it.col(), d_scale * it.value());
  }
  SparseMatrix A(nr + nd, nr + nd);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SaddleSystem assemble_saddle(std::shared_ptr<const RtSpace> rt, std::shared_ptr<const DgSpace> dg, double tau,
                             std::span<const int> cell_order) {
  if (!rt || !dg) throw InvalidArgument("assemble_saddle: null space");
  if (rt->mesh_ptr() != dg->mesh_ptr()) throw InvalidArgument("assemble_saddle: spaces live on different meshes");
  if (rt->degree() != dg->degree()) throw InvalidArgument("assemble_saddle: RT and DG degrees differ");
  if (!(tau > 0.0)) throw InvalidArgument("assemble_saddle: tau must be positive");
  const SimplicialMesh& mesh = rt->mesh();
  const int d = mesh.dim();
  const int nc = mesh.num_cells();
  if (!cell_order.empty() && static_cast<int>(cell_order.size()) != nc) {
    throw InvalidArgument("assemble_saddle: cell order has wrong length");
  }

  const QuadratureRule rule = simplex_rule(d, matrix_quad_degree(rt->degree()));
  const Tabulation rtab = rt->reference().tabulate(rule);
  const Tabulation dtab = dg->reference().tabulate(rule);
  const int nr = rtab.num_basis;
  const int nd = dtab.num_basis;
  const int nq = rule.size();

  // Cell-independent reference blocks.
  Eigen::MatrixXd Bref = Eigen::MatrixXd::Zero(nr, nd);
  Eigen::MatrixXd Dref = Eigen::MatrixXd::Zero(nd, nd);
  for (int q = 0; q < nq; ++q) {
    const double w = rule.weights[q];
    for (int i = 0; i < nr; ++i)
      for (int k = 0; k < nd; ++k)
        Bref(i, k) += w * rtab.derivative[static_cast<std::size_t>(i) * nq + q] * dtab.values[static_cast<std::size_t>(k) * nq + q];
    for (int k = 0; k < nd; ++k)
      for (int l = 0; l < nd; ++l)
        Dref(k, l) += w * dtab.values[static_cast<std::size_t>(k) * nq + q] * dtab.values[static_cast<std::size_t>(l) * nq + q];
  }
  Dref = (0.5 * (Dref + Dref.transpose())).eval();

  std::vector<Eigen::Triplet<double>> tm, tb, td;
  tm.reserve(static_cast<std::size_t>(nc) * nr * nr);
  tb.reserve(static_cast<std::size_t>(nc) * nr * nd);
  td.reserve(static_cast<std::size_t>(nc) * nd * nd);
  Eigen::MatrixXd Mloc(nr, nr);
  Eigen::MatrixXd hat(nr, d);
  for (int idx = 0; idx < nc; ++idx) {
    const int c = cell_order.empty() ? idx : cell_order[idx];
    const CellGeometry& g = mesh.geometry(c);
    const SmallMat G = g.B.transpose() * g.B;
    Mloc.setZero();
    for (int q = 0; q < nq; ++q) {
      for (int i = 0; i < nr; ++i)
        for (int comp = 0; comp < d; ++comp) hat(i, comp) = rtab.value(comp, i, q);
      Mloc.noalias() += (rule.weights[q] / g.det_B) * hat * G * hat.transpose();
    }
    Mloc = (0.5 * (Mloc + Mloc.transpose())).eval();
    const auto dofs = rt->cell_dofs(c);
    const int off = dg->cell_offset(c);
    for (int i = 0; i < nr; ++i) {
      for (int j = 0; j < nr; ++j) tm.emplace_back(dofs[i].index, dofs[j].index, dofs[i].sign * dofs[j].sign * Mloc(i, j));
      for (int k = 0; k < nd; ++k) tb.emplace_back(dofs[i].index, off + k, dofs[i].sign * Bref(i, k));
    }
    for (int k = 0; k < nd; ++k)
      for (int l = 0; l < nd; ++l) td.emplace_back(off + k, off + l, g.det_B * Dref(k, l));
  }

  SaddleSystem sys;
  sys.rt = std::move(rt);
  sys.dg = std::move(dg);
  sys.tau = tau;
  sys.M.resize(sys.rt->n_dofs(), sys.rt->n_dofs());
  sys.M.setFromTriplets(tm.begin(), tm.end());
  sys.B.resize(sys.rt->n_dofs(), sys.dg->n_dofs());
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.D.resize(sys.dg->n_dofs(), sys.dg->n_dofs());
  sys.D.setFromTriplets(td.begin(), td.end());
  return sys;
}

LoadAssembler::LoadAssembler(std::shared_ptr<const DgSpace> dg, std::shared_ptr<const RtSpace> rt, int quad_degree)
    : dg_(std::move(dg)), rt_(std::move(rt)), rule_(simplex_rule(dg_->dim(), quad_degree)) {
  if (rt_ && rt_->mesh_ptr() != dg_->mesh_ptr()) throw InvalidArgument("LoadAssembler: spaces live on different meshes");
  dg_tab_ = dg_->reference().tabulate(rule_);
  if (rt_) rt_tab_ = rt_->reference().tabulate(rule_);
  const SimplicialMesh& mesh = dg_->mesh();
  points_.reserve(static_cast<std::size_t>(mesh.num_cells()) * rule_.size());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const CellGeometry& g = mesh.geometry(c);
    for (const Point& p : rule_.points) points_.push_back(g.map(p));
  }
}

void LoadAssembler::dg_values(const DgField& u, std::vector<double>& out) const {
  const int nc = dg_->mesh().num_cells();
  const int nq = rule_.size();
  out.resize(static_cast<std::size_t>(nc) * nq);
  kernels::active().gemm_nn(nc, nq, dg_tab_.num_basis, u.coeffs.data(), dg_tab_.values.data(), out.data());
}

Eigen::VectorXd LoadAssembler::moments(std::vector<double>& values) const {
  const SimplicialMesh& mesh = dg_->mesh();
  const int nc = mesh.num_cells();
  const int nq = rule_.size();
  const int nb = dg_tab_.num_basis;
  const auto& k = kernels::active();
  k.scale_columns(nc, nq, rule_.weights.data(), values.data());
  Eigen::VectorXd out(dg_->n_dofs());
  k.gemm_nt(nc, nb, nq, values.data(), dg_tab_.values.data(), out.data());
  for (int c = 0; c < nc; ++c) out.segment(static_cast<Eigen::Index>(c) * nb, nb) *= mesh.geometry(c).det_B;
  return out;
}

Eigen::VectorXd LoadAssembler::nonlinear(const DgField& u_prev, const RtField& sigma_prev, const NonlinearitySpec& spec) {
  const SimplicialMesh& mesh = dg_->mesh();
  const int nc = mesh.num_cells();
  const int nq = rule_.size();
  const std::size_t total = static_cast<std::size_t>(nc) * nq;
  const auto& k = kernels::active();

  dg_values(u_prev, scratch_u_);
  scratch_f_.assign(total, 0.0);
  if (spec.cubic) {
    k.cubic_reaction(total, scratch_u_.data(), spec.linear_shift ? 1.0 : 0.0, scratch_f_.data());
  } else if (spec.linear_shift) {
    for (std::size_t i = 0; i < total; ++i) scratch_f_[i] = -scratch_u_[i];
  }

  if (spec.advection) {
    if (!rt_) throw InvalidArgument("advection term requires an RT space");
    const int d = mesh.dim();
    const int nr = rt_tab_.num_basis;
    const SmallVec b = spec.advection_vector(d);
    scratch_coef_.resize(static_cast<std::size_t>(nc) * nr);
    for (int c = 0; c < nc; ++c) {
      const auto dofs = rt_->cell_dofs(c);
      for (int i = 0; i < nr; ++i) scratch_coef_[static_cast<std::size_t>(c) * nr + i] = dofs[i].sign * sigma_prev.coeffs[dofs[i].index];
    }
    // b . sigma = (B^T b / det) . sigma_ref
    std::vector<double> bsigma(total, 0.0);
    scratch_s_.resize(total);
    for (int comp = 0; comp < d; ++comp) {
      k.gemm_nn(nc, nq, nr, scratch_coef_.data(), rt_tab_.component(comp), scratch_s_.data());
      for (int c = 0; c < nc; ++c) {
        const CellGeometry& g = mesh.geometry(c);
        const double beta = g.B.col(comp).dot(b) / g.det_B;
        double* dst = bsigma.data() + static_cast<std::size_t>(c) * nq;
        const double* src = scratch_s_.data() + static_cast<std::size_t>(c) * nq;
        for (int q = 0; q < nq; ++q) dst[q] += beta * src[q];
      }
    }
    k.multiply_add(total, bsigma.data(), scratch_u_.data(), scratch_f_.data());
  }
  return moments(scratch_f_);
}

Eigen::VectorXd LoadAssembler::source(const SpaceTimeScalar& g, double t) {
  scratch_f_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) scratch_f_[i] = g(points_[i], t);
  return moments(scratch_f_);
}

Eigen::VectorXd assemble_nonlinear_load(std::shared_ptr<const DgSpace> dg, std::shared_ptr<const RtSpace> rt,
                                        const DgField& u_prev, const RtField& sigma_prev,
                                        const NonlinearitySpec& spec) {
  const int r = dg->degree();
  LoadAssembler la(std::move(dg), std::move(rt), nonlinear_quad_degree(r));
  return la.nonlinear(u_prev, sigma_prev, spec);
}

Eigen::VectorXd assemble_source(std::shared_ptr<const DgSpace> dg, const SpaceTimeScalar& g, double t) {
  const int r = dg->degree();
  LoadAssembler la(std::move(dg), nullptr, source_quad_degree(r));
  return la.source(g, t);
}

}  // namespace rtmix
