#include "rtmix/local_projection.hpp"

#include "rtmix/errors.hpp"
#include "rtmix/polynomial.hpp"

#include <Eigen/Geometry>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

namespace rtmix {
namespace {

constexpr int data_quad_degree(int r) { return 2 * r + 4; }

double face_simplex_measure(int face_dim) { return face_dim == 1 ? 1.0 : 0.5; }

// Barycentric monomials of degree r on a face, evaluated at a physical point
// given its face-barycentric coordinates.
Eigen::VectorXd face_test_values(const std::vector<MultiIndex>& idx, const std::array<double, 3>& lambda, int n) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    double v = 1.0;
    for (int k = 0; k < n; ++k) v *= std::pow(lambda[k], idx[a][k]);
    out[a] = v;
  }
  return out;
}

struct FaceSample {
  Point x;
  std::array<double, 3> lambda{};
  double weight = 0.0;
};

std::vector<FaceSample> sample_face(const LocalFace& face, const QuadratureRule& rule) {
  const int n = static_cast<int>(face.vertices.size());
  const double scale = face.measure / face_simplex_measure(n - 1);
  std::vector<FaceSample> out(rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    const Point& t = rule.points[q];
    FaceSample& s = out[q];
    s.lambda[0] = 1.0 - t.sum();
    s.x = face.vertices[0];
    for (int k = 1; k < n; ++k) {
      s.lambda[k] = t[k - 1];
      s.x += t[k - 1] * (face.vertices[k] - face.vertices[0]);
    }
    s.weight = rule.weights[q] * scale;
  }
  return out;
}

// Interior test monomials in scaled physical coordinates (x - b) / h.
struct InteriorTest {
  std::vector<MultiIndex> mono;
  Point origin;
  double scale = 1.0;

  void eval(const Point& x, Eigen::Ref<Eigen::VectorXd> out) const {
    const Point y = (x - origin) / scale;
    eval_monomials(mono, y, out);
  }
};

double cell_diameter(const CellGeometry& g) {
  const int d = g.dim();
  std::vector<Point> v(d + 1, g.b);
  for (int k = 0; k < d; ++k) v[k + 1] = g.b + g.B.col(k);
  double diam = 0.0;
  for (int a = 0; a <= d; ++a) {
    for (int b = a + 1; b <= d; ++b) diam = std::max(diam, (v[a] - v[b]).norm());
  }
  return diam;
}

SmallVec piola(const CellGeometry& g, const SmallVec& hat) { return g.B * hat / g.det_B; }

}  // namespace

LocalFace local_face(const CellGeometry& geom, int i) {
  const int d = geom.dim();
  if (i < 0 || i > d) throw InvalidArgument("local_face: bad face index");
  const auto ref = reference_vertices(d);
  LocalFace f;
  for (int k = 0; k <= d; ++k) {
    if (k != i) f.vertices.push_back(geom.map(ref[k]));
  }
  SmallVec grad(d);
  if (i == 0) {
    grad = -geom.B_inv.colwise().sum().transpose();
  } else {
    grad = geom.B_inv.row(i - 1).transpose();
  }
  f.outward_normal = -grad / grad.norm();
  if (d == 2) {
    f.measure = (f.vertices[1] - f.vertices[0]).norm();
    f.diameter = f.measure;
  } else {
    const Eigen::Vector3d e1 = f.vertices[1] - f.vertices[0];
    const Eigen::Vector3d e2 = f.vertices[2] - f.vertices[0];
    f.measure = 0.5 * e1.cross(e2).norm();
    f.diameter = std::max({e1.norm(), e2.norm(), (f.vertices[2] - f.vertices[1]).norm()});
  }
  return f;
}

void face_quadrature(const LocalFace& face, const QuadratureRule& face_rule, std::vector<Point>& points,
                     std::vector<double>& weights) {
  const auto samples = sample_face(face, face_rule);
  points.clear();
  weights.clear();
  for (const auto& s : samples) {
    points.push_back(s.x);
    weights.push_back(s.weight);
  }
}

Eigen::VectorXd local_rt_project(const CellGeometry& geom, const LocalProjectionData& data, int r,
                                 const FaceSigns& signs) {
  const int d = geom.dim();
  if (static_cast<int>(data.q.size()) != d + 1) throw InvalidArgument("local_rt_project: need one face datum per face");
  if (!(std::isfinite(geom.det_B) && geom.det_B > 0.0)) throw NumericalDegeneracy("local RT projection on a degenerate cell");
  const RtReferenceElement& ref = rt_reference(d, r);
  const int n = ref.num_dofs();
  const int nf = ref.num_face_dofs();
  const auto& findex = ref.face_indices();

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd vals(n, d);

  const QuadratureRule face_rule = simplex_rule(d - 1, data_quad_degree(r));
  for (int i = 0; i <= d; ++i) {
    const LocalFace face = local_face(geom, i);
    const SmallVec normal = signs[i] * face.outward_normal;
    for (const FaceSample& s : sample_face(face, face_rule)) {
      const Eigen::VectorXd mu = face_test_values(findex, s.lambda, d);
      ref.eval(geom.pullback(s.x), vals);
      const Eigen::VectorXd flux = (vals * (geom.B.transpose() * normal)) / geom.det_B;
      A.middleRows(i * nf, nf).noalias() += s.weight * mu * flux.transpose();
      rhs.segment(i * nf, nf) += s.weight * data.q[i](s.x) * mu;
    }
  }

  const int nint = ref.num_interior_dofs();
  if (nint > 0) {
    InteriorTest test{monomial_exponents(d, r - 1), geom.b, cell_diameter(geom)};
    const int nm = static_cast<int>(test.mono.size());
    Eigen::VectorXd m(nm);
    const QuadratureRule rule = simplex_rule(d, data_quad_degree(r));
    const int off = (d + 1) * nf;
    for (int q = 0; q < rule.size(); ++q) {
      const Point x = geom.map(rule.points[q]);
      const double w = rule.weights[q] * geom.det_B;
      ref.eval(rule.points[q], vals);
      const Eigen::MatrixXd phys = (vals * geom.B.transpose()) / geom.det_B;  // n x d
      test.eval(x, m);
      const SmallVec pval = data.p(x);
      for (int c = 0; c < d; ++c) {
        A.middleRows(off + c * nm, nm).noalias() += w * m * phys.col(c).transpose();
        rhs.segment(off + c * nm, nm) += w * pval[c] * m;
      }
    }
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.rank() < n) throw NumericalDegeneracy("local RT projection system is singular");
  return lu.solve(rhs);
}

Eigen::VectorXd local_rt_project_reference(const CellGeometry& geom, const LocalProjectionData& data, int r,
                                           const FaceSigns& signs) {
  const int d = geom.dim();
  if (static_cast<int>(data.q.size()) != d + 1) throw InvalidArgument("local_rt_project: need one face datum per face");
  const RtReferenceElement& ref = rt_reference(d, r);
  const int nf = ref.num_face_dofs();
  const auto& findex = ref.face_indices();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ref.num_dofs());

  // Face moments on the reference faces of the scaled, pulled-back face data.
  const CellGeometry unit = simplex_geometry(reference_vertices(d));
  const QuadratureRule face_rule = simplex_rule(d - 1, data_quad_degree(r));
  for (int i = 0; i <= d; ++i) {
    const LocalFace ref_face = local_face(unit, i);
    const double ratio = local_face(geom, i).measure / ref_face.measure;
    for (const FaceSample& s : sample_face(ref_face, face_rule)) {
      const double qhat = signs[i] * ratio * data.q[i](geom.map(s.x));
      out.segment(i * nf, nf) += s.weight * qhat * face_test_values(findex, s.lambda, d);
    }
  }

  // Interior moments of the Piola pull-back det(B) B^{-1} p o T.
  const int nint = ref.num_interior_dofs();
  if (nint > 0) {
    const auto& mono = ref.interior_monomials();
    const int nm = static_cast<int>(mono.size());
    Eigen::VectorXd m(nm);
    const QuadratureRule rule = simplex_rule(d, data_quad_degree(r));
    const int off = (d + 1) * nf;
    for (int q = 0; q < rule.size(); ++q) {
      const SmallVec phat = geom.det_B * (geom.B_inv * data.p(geom.map(rule.points[q])));
      eval_monomials(mono, rule.points[q], m);
      for (int c = 0; c < d; ++c) out.segment(off + c * nm, nm) += rule.weights[q] * phat[c] * m;
    }
  }
  return out;
}

double local_rt_l2_squared(const CellGeometry& geom, int r, const Eigen::VectorXd& coeffs, int quad_degree) {
  const int d = geom.dim();
  const RtReferenceElement& ref = rt_reference(d, r);
  Eigen::MatrixXd vals(ref.num_dofs(), d);
  const QuadratureRule rule = simplex_rule(d, quad_degree);
  double sum = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    ref.eval(rule.points[q], vals);
    const SmallVec v = piola(geom, vals.transpose() * coeffs);
    sum += rule.weights[q] * v.squaredNorm();
  }
  return sum * geom.det_B;
}

std::optional<double> local_stability_ratio(const CellGeometry& geom, const LocalProjectionData& data, int r,
                                            const FaceSigns& signs) {
  const int d = geom.dim();
  const int deg = data_quad_degree(r);
  const Eigen::VectorXd zeta = local_rt_project(geom, data, r, signs);
  const double num = local_rt_l2_squared(geom, r, zeta, deg);

  const QuadratureRule rule = simplex_rule(d, deg);
  double p2 = 0.0;
  for (int q = 0; q < rule.size(); ++q) p2 += rule.weights[q] * data.p(geom.map(rule.points[q])).squaredNorm();
  p2 *= geom.det_B;

  const double h = cell_diameter(geom);
  const QuadratureRule face_rule = simplex_rule(d - 1, deg);
  double q2 = 0.0;
  for (int i = 0; i <= d; ++i) {
    for (const FaceSample& s : sample_face(local_face(geom, i), face_rule)) {
      const double v = data.q[i](s.x);
      q2 += s.weight * v * v;
    }
  }
  const double den = p2 + h * q2;
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

double local_stability_bound(const CellGeometry& geom, int r, int data_degree) {
  const int d = geom.dim();
  const double h = cell_diameter(geom);
  InteriorTest pbasis{monomial_exponents(d, data_degree), geom.b, h};
  const auto qbasis = barycentric_indices(d, data_degree);
  const int np = static_cast<int>(pbasis.mono.size());
  const int nq = static_cast<int>(qbasis.size());
  const int nz = d * np + (d + 1) * nq;
  const RtReferenceElement& ref = rt_reference(d, r);
  const int deg = 2 * std::max(data_degree, r + 1) + 2;

  const auto zero_scalar = [](const Point&) { return 0.0; };
  const auto zero_vector = [d](const Point&) { return SmallVec(SmallVec::Zero(d)); };

  Eigen::MatrixXd Z(ref.num_dofs(), nz);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
  std::vector<LocalFace> faces;
  for (int i = 0; i <= d; ++i) faces.push_back(local_face(geom, i));

  int col = 0;
  for (int c = 0; c < d; ++c) {
    for (int j = 0; j < np; ++j, ++col) {
      LocalProjectionData data{[&, c, j](const Point& x) {
                                 Eigen::VectorXd m(np);
                                 pbasis.eval(x, m);
                                 SmallVec v = SmallVec::Zero(d);
                                 v[c] = m[j];
                                 return v;
                               },
                               std::vector<ScalarFunction>(d + 1, zero_scalar)};
      Z.col(col) = local_rt_project(geom, data, r);
    }
  }
  for (int i = 0; i <= d; ++i) {
    for (int a = 0; a < nq; ++a, ++col) {
      std::vector<ScalarFunction> q(d + 1, zero_scalar);
      const LocalFace face = faces[i];
      q[i] = [face, a, &qbasis, d](const Point& x) {
        // barycentric coordinates of x on the face
        Eigen::MatrixXd T(x.size(), d - 1);
        for (int k = 1; k < d; ++k) T.col(k - 1) = face.vertices[k] - face.vertices[0];
        const Eigen::VectorXd t = T.colPivHouseholderQr().solve(Eigen::VectorXd(x - face.vertices[0]));
        std::array<double, 3> lambda{1.0 - t.sum(), 0.0, 0.0};
        for (int k = 1; k < d; ++k) lambda[k] = t[k - 1];
        return face_test_values({qbasis[a]}, lambda, d)[0];
      };
      Z.col(col) = local_rt_project(geom, LocalProjectionData{zero_vector, q}, r);
    }
  }

  // Data Gram matrix: L2(K) mass of the p basis, h * L2(F_i) mass of each q basis.
  const QuadratureRule rule = simplex_rule(d, deg);
  Eigen::VectorXd m(np);
  for (int q = 0; q < rule.size(); ++q) {
    pbasis.eval(geom.map(rule.points[q]), m);
    const Eigen::MatrixXd mm = rule.weights[q] * geom.det_B * m * m.transpose();
    for (int c = 0; c < d; ++c) H.block(c * np, c * np, np, np) += mm;
  }
  const QuadratureRule face_rule = simplex_rule(d - 1, deg);
  for (int i = 0; i <= d; ++i) {
    const int off = d * np + i * nq;
    for (const FaceSample& s : sample_face(faces[i], face_rule)) {
      const Eigen::VectorXd mu = face_test_values(qbasis, s.lambda, d);
      H.block(off, off, nq, nq) += h * s.weight * mu * mu.transpose();
    }
  }

  // Local RT mass matrix.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(ref.num_dofs(), ref.num_dofs());
  Eigen::MatrixXd vals(ref.num_dofs(), d);
  for (int q = 0; q < rule.size(); ++q) {
    ref.eval(rule.points[q], vals);
    const Eigen::MatrixXd phys = (vals * geom.B.transpose()) / geom.det_B;
    G.noalias() += rule.weights[q] * geom.det_B * phys * phys.transpose();
  }
  const Eigen::MatrixXd N = Z.transpose() * G * Z;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (N + N.transpose()), H,
                                                                Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalDegeneracy("stability eigenproblem failed");
  return eig.eigenvalues().maxCoeff();
}

}  // namespace rtmix
