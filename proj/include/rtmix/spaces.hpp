#pragma once

#include "rtmix/mesh.hpp"
#include "rtmix/polynomial.hpp"
#include "rtmix/quadrature.hpp"
#include "rtmix/types.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace rtmix {

/// dim RT_r(K) = (d+r+1)(d+r-1)! / ((d-1)! r!)
int rt_local_dim(int dim, int r);
/// dim P_r(F) for a (d-1)-dimensional face.
int rt_face_dofs(int dim, int r);
/// d * dim P_{r-1}(K)
int rt_interior_dofs(int dim, int r);
/// dim P_r(K)
int dg_local_dim(int dim, int r);

/// Throws UnsupportedFeature unless (dim, r) is one of the provided elements:
/// r in {0,1,2} for dim 2 and r in {0,1} for dim 3.
void require_supported_degree(int dim, int r);

/// Basis values tabulated at a fixed set of reference points, row-major
/// [component][basis][point] for values and [basis][point] for divergences.
struct Tabulation {
  int num_basis = 0;
  int num_points = 0;
  int dim = 0;
  std::vector<double> values;
  std::vector<double> derivative;  ///< divergence (RT) or gradient [comp][basis][point] (DG)

  const double* component(int c) const { return values.data() + static_cast<std::size_t>(c) * num_basis * num_points; }
  double value(int c, int k, int q) const { return values[(static_cast<std::size_t>(c) * num_basis + k) * num_points + q]; }
};

/// Reference Raviart-Thomas element on the unit simplex.
///
/// Local degrees of freedom: for each face i (opposite vertex i) the moments
/// of the outward normal component against the barycentric monomials
/// lambda^alpha, |alpha| = r, of that face's vertices taken in increasing
/// local order; then the interior moments against e_c x^beta, |beta| <= r-1.
/// The basis is the dual basis, obtained by inverting the Vandermonde matrix
/// of these functionals on a monomial spanning set of [P_r]^d + x P_r.
class RtReferenceElement {
 public:
  RtReferenceElement(int dim, int r);

  int dim() const { return dim_; }
  int degree() const { return r_; }
  int num_dofs() const { return static_cast<int>(coeffs_.cols()); }
  int num_face_dofs() const { return static_cast<int>(face_indices_.size()); }
  int num_interior_dofs() const { return num_dofs() - (dim_ + 1) * num_face_dofs(); }
  const std::vector<MultiIndex>& face_indices() const { return face_indices_; }
  const std::vector<MultiIndex>& interior_monomials() const { return interior_mono_; }

  /// values(k, c): component c of basis function k.
  void eval(const Point& xref, Eigen::Ref<Eigen::MatrixXd> values) const;
  void eval_div(const Point& xref, Eigen::Ref<Eigen::VectorXd> div) const;
  Tabulation tabulate(const QuadratureRule& rule) const;

  /// Apply the local functionals to a vector polynomial given on the
  /// reference element (used to verify duality).
  Eigen::VectorXd apply_functionals(const std::function<SmallVec(const Point&)>& v) const;

 private:
  int dim_;
  int r_;
  std::vector<MultiIndex> mono_;  // degree <= r + 1
  std::vector<MultiIndex> face_indices_;
  std::vector<MultiIndex> interior_mono_;
  Eigen::MatrixXd coeffs_;  // (dim * mono) x ndof
};

/// Scalar P_r basis on the reference simplex: monomials x^alpha, |alpha| <= r.
class DgReferenceElement {
 public:
  DgReferenceElement(int dim, int r);
  int dim() const { return dim_; }
  int degree() const { return r_; }
  int num_dofs() const { return static_cast<int>(mono_.size()); }
  void eval(const Point& xref, Eigen::Ref<Eigen::VectorXd> values) const;
  void eval_grad(const Point& xref, Eigen::Ref<Eigen::MatrixXd> grads) const;
  Tabulation tabulate(const QuadratureRule& rule) const;

 private:
  int dim_;
  int r_;
  std::vector<MultiIndex> mono_;
};

const RtReferenceElement& rt_reference(int dim, int r);
const DgReferenceElement& dg_reference(int dim, int r);

/// Reference simplex vertices 0, e_1, ..., e_d.
std::vector<Point> reference_vertices(int dim);

struct DofRef {
  int index = -1;
  double sign = 1.0;
};

/// Global H(div)-conforming RT_r space. Face DOFs come first (a contiguous
/// block per face, numbered over the face's vertices in ascending global
/// order), followed by the interior DOFs of each cell.
class RtSpace {
 public:
  RtSpace(std::shared_ptr<const SimplicialMesh> mesh, int r);

  const SimplicialMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SimplicialMesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return r_; }
  int dim() const { return mesh_->dim(); }
  int n_dofs() const { return n_dofs_; }
  int local_dofs() const { return ref_->num_dofs(); }
  const RtReferenceElement& reference() const { return *ref_; }

  std::span<const DofRef> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * local_dofs(),
            static_cast<std::size_t>(local_dofs())};
  }
  int face_dof_offset(int face) const { return face * ref_->num_face_dofs(); }
  int interior_dof_offset(int cell) const {
    return mesh_->num_faces() * ref_->num_face_dofs() + cell * ref_->num_interior_dofs();
  }

 private:
  std::shared_ptr<const SimplicialMesh> mesh_;
  int r_;
  const RtReferenceElement* ref_;
  int n_dofs_ = 0;
  std::vector<DofRef> cell_dofs_;
};

/// Discontinuous P_r space with contiguous per-cell blocks.
class DgSpace {
 public:
  DgSpace(std::shared_ptr<const SimplicialMesh> mesh, int r);

  const SimplicialMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SimplicialMesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return r_; }
  int dim() const { return mesh_->dim(); }
  int n_dofs() const { return mesh_->num_cells() * local_dofs(); }
  int local_dofs() const { return ref_->num_dofs(); }
  int cell_offset(int cell) const { return cell * local_dofs(); }
  const DgReferenceElement& reference() const { return *ref_; }

 private:
  std::shared_ptr<const SimplicialMesh> mesh_;
  int r_;
  const DgReferenceElement* ref_;
};

std::shared_ptr<const RtSpace> build_rt_space(std::shared_ptr<const SimplicialMesh> mesh, int r);
std::shared_ptr<const DgSpace> build_dg_space(std::shared_ptr<const SimplicialMesh> mesh, int r);

/// Coefficient vector over a space.
template <class Space>
struct DiscreteField {
  std::shared_ptr<const Space> space;
  Eigen::VectorXd coeffs;
  std::optional<double> time;

  DiscreteField() = default;
  explicit DiscreteField(std::shared_ptr<const Space> s, std::optional<double> t = std::nullopt)
      : space(std::move(s)), coeffs(Eigen::VectorXd::Zero(space->n_dofs())), time(t) {}
  DiscreteField(std::shared_ptr<const Space> s, Eigen::VectorXd c, std::optional<double> t = std::nullopt);
};

using RtField = DiscreteField<RtSpace>;
using DgField = DiscreteField<DgSpace>;

/// Piola-mapped value of local basis function `local_dof` (outward-oriented
/// local numbering, before global signs) at reference point xref.
SmallVec evaluate_rt_basis(const CellGeometry& geom, const RtReferenceElement& ref, int local_dof,
                           const Point& xref);

/// Signed local coefficients of an RT field on one cell.
Eigen::VectorXd local_coefficients(const RtField& field, int cell);

SmallVec evaluate_field(const RtField& field, int cell, const Point& xref);
double evaluate_field(const DgField& field, int cell, const Point& xref);
/// Divergence of an RT field on a cell (physical coordinates).
double evaluate_divergence(const RtField& field, int cell, const Point& xref);
/// Physical gradient of a DG field on a cell.
SmallVec evaluate_gradient(const DgField& field, int cell, const Point& xref);

}  // namespace rtmix
