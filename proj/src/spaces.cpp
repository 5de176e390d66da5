#include "rtmix/spaces.hpp"

#include "rtmix/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace rtmix {

int rt_local_dim(int dim, int r) { return static_cast<int>((dim + r + 1) * binomial(dim + r - 1, r)); }
int rt_face_dofs(int dim, int r) { return static_cast<int>(binomial(dim - 1 + r, r)); }
int rt_interior_dofs(int dim, int r) { return r == 0 ? 0 : static_cast<int>(dim * binomial(dim + r - 1, r - 1)); }
int dg_local_dim(int dim, int r) { return static_cast<int>(binomial(dim + r, r)); }

void require_supported_degree(int dim, int r) {
  const bool ok = (dim == 2 && r >= 0 && r <= 2) || (dim == 3 && r >= 0 && r <= 1);
  if (!ok) {
    throw UnsupportedFeature("unsupported element (d=" + std::to_string(dim) + ", r=" + std::to_string(r) +
                             "); supported degrees: r in {0,1,2} for d=2, r in {0,1} for d=3");
  }
}

std::vector<Point> reference_vertices(int dim) {
  std::vector<Point> v(dim + 1, Point::Zero(dim));
  for (int k = 0; k < dim; ++k) v[k + 1][k] = 1.0;
  return v;
}

namespace {

struct ReferenceFace {
  std::vector<int> local_vertices;  // ascending
  SmallVec normal;                  // outward unit normal
  double measure = 0.0;
};

ReferenceFace reference_face(int dim, int i) {
  ReferenceFace f;
  const auto verts = reference_vertices(dim);
  for (int k = 0; k <= dim; ++k) {
    if (k != i) f.local_vertices.push_back(k);
  }
  f.normal = SmallVec::Zero(dim);
  if (i == 0) {
    f.normal.setConstant(1.0 / std::sqrt(static_cast<double>(dim)));
  } else {
    f.normal[i - 1] = -1.0;
  }
  if (dim == 2) {
    f.measure = (verts[f.local_vertices[1]] - verts[f.local_vertices[0]]).norm();
  } else {
    const Eigen::Vector3d e1 = verts[f.local_vertices[1]] - verts[f.local_vertices[0]];
    const Eigen::Vector3d e2 = verts[f.local_vertices[2]] - verts[f.local_vertices[0]];
    f.measure = 0.5 * e1.cross(e2).norm();
  }
  return f;
}

double face_simplex_measure(int face_dim) { return face_dim == 1 ? 1.0 : 0.5; }

}  // namespace

RtReferenceElement::RtReferenceElement(int dim, int r) : dim_(dim), r_(r) {
  require_supported_degree(dim, r);
  mono_ = monomial_exponents(dim, r + 1);
  face_indices_ = barycentric_indices(dim, r);
  interior_mono_ = r > 0 ? monomial_exponents(dim, r - 1) : std::vector<MultiIndex>{};
  const int nmono = static_cast<int>(mono_.size());

  // Spanning set of [P_r]^d + x P~_r, as coefficient columns.
  std::vector<Eigen::VectorXd> span;
  auto mono_index = [&](const MultiIndex& e) {
    return static_cast<int>(std::find(mono_.begin(), mono_.end(), e) - mono_.begin());
  };
  for (int c = 0; c < dim; ++c) {
    for (const auto& e : monomial_exponents(dim, r)) {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(dim * nmono);
      s[c * nmono + mono_index(e)] = 1.0;
      span.push_back(s);
    }
  }
  for (const auto& e : homogeneous_exponents(dim, r)) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dim * nmono);
    for (int c = 0; c < dim; ++c) {
      MultiIndex raised = e;
      ++raised[c];
      s[c * nmono + mono_index(raised)] = 1.0;
    }
    span.push_back(s);
  }
  const int n = static_cast<int>(span.size());
  if (n != rt_local_dim(dim, r)) throw NumericalDegeneracy("RT spanning set has wrong size");

  Eigen::MatrixXd S(dim * nmono, n);
  for (int j = 0; j < n; ++j) S.col(j) = span[j];
  coeffs_ = S;  // temporarily the spanning set, so apply_functionals can evaluate it

  Eigen::MatrixXd V(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd mono_vals(nmono);
    const auto column = [&](const Point& x) {
      eval_monomials(mono_, x, mono_vals);
      SmallVec v(dim);
      for (int c = 0; c < dim; ++c) v[c] = S.col(j).segment(c * nmono, nmono).dot(mono_vals);
      return v;
    };
    V.col(j) = apply_functionals(column);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (!lu.isInvertible()) throw NumericalDegeneracy("RT Vandermonde matrix is singular");
  coeffs_ = S * lu.inverse();
}

Eigen::VectorXd RtReferenceElement::apply_functionals(const std::function<SmallVec(const Point&)>& v) const {
  const int dim = dim_;
  const int nf = static_cast<int>(face_indices_.size());
  const int nint = dim * static_cast<int>(interior_mono_.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero((dim + 1) * nf + nint);
  const auto verts = reference_vertices(dim);

  const QuadratureRule face_rule = simplex_rule(dim - 1, 2 * r_ + 2);
  for (int i = 0; i <= dim; ++i) {
    const ReferenceFace f = reference_face(dim, i);
    const double scale = f.measure / face_simplex_measure(dim - 1);
    for (int q = 0; q < face_rule.size(); ++q) {
      const Point& t = face_rule.points[q];
      std::array<double, 3> lambda{};
      lambda[0] = 1.0 - t.sum();
      for (int k = 1; k < dim; ++k) lambda[k] = t[k - 1];
      Point x = verts[f.local_vertices[0]];
      for (int k = 1; k < dim; ++k) x += t[k - 1] * (verts[f.local_vertices[k]] - verts[f.local_vertices[0]]);
      const double flux = v(x).dot(f.normal) * face_rule.weights[q] * scale;
      for (int a = 0; a < nf; ++a) {
        double mu = 1.0;
        for (int k = 0; k < dim; ++k) mu *= std::pow(lambda[k], face_indices_[a][k]);
        out[i * nf + a] += flux * mu;
      }
    }
  }
  if (nint > 0) {
    const QuadratureRule rule = simplex_rule(dim, 2 * r_ + 2);
    const int nm = static_cast<int>(interior_mono_.size());
    Eigen::VectorXd m(nm);
    for (int q = 0; q < rule.size(); ++q) {
      const SmallVec val = v(rule.points[q]);
      eval_monomials(interior_mono_, rule.points[q], m);
      for (int c = 0; c < dim; ++c) {
        for (int k = 0; k < nm; ++k) out[(dim + 1) * nf + c * nm + k] += rule.weights[q] * val[c] * m[k];
      }
    }
  }
  return out;
}

void RtReferenceElement::eval(const Point& xref, Eigen::Ref<Eigen::MatrixXd> values) const {
  const int nmono = static_cast<int>(mono_.size());
  Eigen::VectorXd m(nmono);
  eval_monomials(mono_, xref, m);
  for (int c = 0; c < dim_; ++c) {
    values.col(c) = coeffs_.middleRows(c * nmono, nmono).transpose() * m;
  }
}

void RtReferenceElement::eval_div(const Point& xref, Eigen::Ref<Eigen::VectorXd> div) const {
  const int nmono = static_cast<int>(mono_.size());
  Eigen::MatrixXd g(nmono, dim_);
  eval_monomial_gradients(mono_, xref, g);
  div.setZero();
  for (int c = 0; c < dim_; ++c) div += coeffs_.middleRows(c * nmono, nmono).transpose() * g.col(c);
}

Tabulation RtReferenceElement::tabulate(const QuadratureRule& rule) const {
  Tabulation t;
  t.num_basis = num_dofs();
  t.num_points = rule.size();
  t.dim = dim_;
  t.values.assign(static_cast<std::size_t>(dim_) * t.num_basis * t.num_points, 0.0);
  t.derivative.assign(static_cast<std::size_t>(t.num_basis) * t.num_points, 0.0);
  Eigen::MatrixXd vals(t.num_basis, dim_);
  Eigen::VectorXd div(t.num_basis);
  for (int q = 0; q < t.num_points; ++q) {
    eval(rule.points[q], vals);
    eval_div(rule.points[q], div);
    for (int k = 0; k < t.num_basis; ++k) {
      for (int c = 0; c < dim_; ++c) t.values[(static_cast<std::size_t>(c) * t.num_basis + k) * t.num_points + q] = vals(k, c);
      t.derivative[static_cast<std::size_t>(k) * t.num_points + q] = div[k];
    }
  }
  return t;
}

DgReferenceElement::DgReferenceElement(int dim, int r) : dim_(dim), r_(r) {
  require_supported_degree(dim, r);
  mono_ = monomial_exponents(dim, r);
}

void DgReferenceElement::eval(const Point& xref, Eigen::Ref<Eigen::VectorXd> values) const {
  eval_monomials(mono_, xref, values);
}

void DgReferenceElement::eval_grad(const Point& xref, Eigen::Ref<Eigen::MatrixXd> grads) const {
  eval_monomial_gradients(mono_, xref, grads);
}

Tabulation DgReferenceElement::tabulate(const QuadratureRule& rule) const {
  Tabulation t;
  t.num_basis = num_dofs();
  t.num_points = rule.size();
  t.dim = 1;
  t.values.assign(static_cast<std::size_t>(t.num_basis) * t.num_points, 0.0);
  t.derivative.assign(static_cast<std::size_t>(dim_) * t.num_basis * t.num_points, 0.0);
  Eigen::VectorXd vals(t.num_basis);
  Eigen::MatrixXd grads(t.num_basis, dim_);
  for (int q = 0; q < t.num_points; ++q) {
    eval(rule.points[q], vals);
    eval_grad(rule.points[q], grads);
    for (int k = 0; k < t.num_basis; ++k) {
      t.values[static_cast<std::size_t>(k) * t.num_points + q] = vals[k];
      for (int c = 0; c < dim_; ++c) {
        t.derivative[(static_cast<std::size_t>(c) * t.num_basis + k) * t.num_points + q] = grads(k, c);
      }
    }
  }
  return t;
}

const RtReferenceElement& rt_reference(int dim, int r) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<RtReferenceElement>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, r}];
  if (!slot) slot = std::make_unique<RtReferenceElement>(dim, r);
  return *slot;
}

const DgReferenceElement& dg_reference(int dim, int r) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<DgReferenceElement>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{dim, r}];
  if (!slot) slot = std::make_unique<DgReferenceElement>(dim, r);
  return *slot;
}

RtSpace::RtSpace(std::shared_ptr<const SimplicialMesh> mesh, int r)
    : mesh_(std::move(mesh)), r_(r), ref_(&rt_reference(mesh_->dim(), r)) {
  const int d = mesh_->dim();
  const int nf = ref_->num_face_dofs();
  const int ni = ref_->num_interior_dofs();
  const int nloc = ref_->num_dofs();
  n_dofs_ = mesh_->num_faces() * nf + mesh_->num_cells() * ni;

  const auto& findex = ref_->face_indices();
  cell_dofs_.resize(static_cast<std::size_t>(mesh_->num_cells()) * nloc);
  for (int c = 0; c < mesh_->num_cells(); ++c) {
    const auto& verts = mesh_->cell(c);
    DofRef* out = cell_dofs_.data() + static_cast<std::size_t>(c) * nloc;
    for (int i = 0; i <= d; ++i) {
      const CellFace cf = mesh_->cell_face(c, i);
      const Face& face = mesh_->face(cf.face);
      // position of each local face vertex within the face's ascending global order
      std::array<int, 3> pos{};
      int k = 0;
      for (int lv = 0; lv <= d; ++lv) {
        if (lv == i) continue;
        const int g = verts[lv];
        pos[k++] = static_cast<int>(std::find(face.vertex_ids.begin(), face.vertex_ids.begin() + d, g) -
                                    face.vertex_ids.begin());
      }
      for (int a = 0; a < nf; ++a) {
        MultiIndex beta{0, 0, 0};
        for (int j = 0; j < d; ++j) beta[pos[j]] = findex[a][j];
        const int ga = static_cast<int>(std::find(findex.begin(), findex.end(), beta) - findex.begin());
        out[i * nf + a] = {face_dof_offset(cf.face) + ga, static_cast<double>(cf.sign)};
      }
    }
    for (int j = 0; j < ni; ++j) out[(d + 1) * nf + j] = {interior_dof_offset(c) + j, 1.0};
  }
}

DgSpace::DgSpace(std::shared_ptr<const SimplicialMesh> mesh, int r)
    : mesh_(std::move(mesh)), r_(r), ref_(&dg_reference(mesh_->dim(), r)) {}

std::shared_ptr<const RtSpace> build_rt_space(std::shared_ptr<const SimplicialMesh> mesh, int r) {
  if (!mesh) throw InvalidArgument("build_rt_space: null mesh");
  require_supported_degree(mesh->dim(), r);
  return std::make_shared<const RtSpace>(std::move(mesh), r);
}

std::shared_ptr<const DgSpace> build_dg_space(std::shared_ptr<const SimplicialMesh> mesh, int r) {
  if (!mesh) throw InvalidArgument("build_dg_space: null mesh");
  require_supported_degree(mesh->dim(), r);
  return std::make_shared<const DgSpace>(std::move(mesh), r);
}

template <class Space>
DiscreteField<Space>::DiscreteField(std::shared_ptr<const Space> s, Eigen::VectorXd c, std::optional<double> t)
    : space(std::move(s)), coeffs(std::move(c)), time(t) {
  if (coeffs.size() != space->n_dofs()) throw InvalidArgument("field coefficient length does not match space");
}

template struct DiscreteField<RtSpace>;
template struct DiscreteField<DgSpace>;

SmallVec evaluate_rt_basis(const CellGeometry& geom, const RtReferenceElement& ref, int local_dof,
                           const Point& xref) {
  Eigen::MatrixXd vals(ref.num_dofs(), ref.dim());
  ref.eval(xref, vals);
  SmallVec hat = vals.row(local_dof).transpose();
  return geom.B * hat / geom.det_B;
}

Eigen::VectorXd local_coefficients(const RtField& field, int cell) {
  const auto dofs = field.space->cell_dofs(cell);
  Eigen::VectorXd c(dofs.size());
  for (std::size_t k = 0; k < dofs.size(); ++k) c[k] = dofs[k].sign * field.coeffs[dofs[k].index];
  return c;
}

SmallVec evaluate_field(const RtField& field, int cell, const Point& xref) {
  const auto& ref = field.space->reference();
  const CellGeometry& g = field.space->mesh().geometry(cell);
  Eigen::MatrixXd vals(ref.num_dofs(), ref.dim());
  ref.eval(xref, vals);
  const SmallVec hat = vals.transpose() * local_coefficients(field, cell);
  return g.B * hat / g.det_B;
}

double evaluate_field(const DgField& field, int cell, const Point& xref) {
  const auto& ref = field.space->reference();
  Eigen::VectorXd vals(ref.num_dofs());
  ref.eval(xref, vals);
  return vals.dot(field.coeffs.segment(field.space->cell_offset(cell), ref.num_dofs()));
}

double evaluate_divergence(const RtField& field, int cell, const Point& xref) {
  const auto& ref = field.space->reference();
  const CellGeometry& g = field.space->mesh().geometry(cell);
  Eigen::VectorXd div(ref.num_dofs());
  ref.eval_div(xref, div);
  return div.dot(local_coefficients(field, cell)) / g.det_B;
}

SmallVec evaluate_gradient(const DgField& field, int cell, const Point& xref) {
  const auto& ref = field.space->reference();
  const CellGeometry& g = field.space->mesh().geometry(cell);
  Eigen::MatrixXd grads(ref.num_dofs(), ref.dim());
  ref.eval_grad(xref, grads);
  const SmallVec ghat = grads.transpose() * field.coeffs.segment(field.space->cell_offset(cell), ref.num_dofs());
  return g.B_inv.transpose() * ghat;
}

}  // namespace rtmix
