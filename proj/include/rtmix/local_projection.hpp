#pragma once

#include "rtmix/mesh.hpp"
#include "rtmix/quadrature.hpp"
#include "rtmix/spaces.hpp"
#include "rtmix/types.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

namespace rtmix {

/// Interior datum p (vector valued, physical coordinates) and one scalar
/// face datum per local face. The face data are normal components measured
/// against n_i = face_signs[i] * (outward normal of face i).
struct LocalProjectionData {
  VectorFunction p;
  std::vector<ScalarFunction> q;
};

using FaceSigns = std::array<double, 4>;
inline constexpr FaceSigns kOutward{1.0, 1.0, 1.0, 1.0};

/// Physical description of local face i of a cell.
struct LocalFace {
  std::vector<Point> vertices;  ///< images of the reference face vertices, ascending local order
  SmallVec outward_normal;
  double measure = 0.0;
  double diameter = 0.0;
};

LocalFace local_face(const CellGeometry& geom, int i);

/// Quadrature points/weights on a physical face (weights include |F|).
void face_quadrature(const LocalFace& face, const QuadratureRule& face_rule, std::vector<Point>& points,
                     std::vector<double>& weights);

/// Solves the local moment problem on a physical cell: the returned
/// coefficients (over the cell's outward-oriented local RT basis) match the
/// interior moments of p against [P_{r-1}(K)]^d and the face moments of q_i
/// against P_r(F_i). Built and solved as a dense system of size rt_local_dim.
Eigen::VectorXd local_rt_project(const CellGeometry& geom, const LocalProjectionData& data, int r,
                                 const FaceSigns& signs = kOutward);

/// Same projection computed on the reference simplex: the data are pulled
/// back (Piola for p, composition scaled by |F_i|/|F_ref_i| for q_i) and the
/// reference functionals applied directly.
Eigen::VectorXd local_rt_project_reference(const CellGeometry& geom, const LocalProjectionData& data, int r,
                                           const FaceSigns& signs = kOutward);

/// ||zeta||^2 / (||p||^2 + sum_i h ||q_i||^2), h the cell diameter.
/// Empty when the data vanish.
std::optional<double> local_stability_ratio(const CellGeometry& geom, const LocalProjectionData& data, int r,
                                            const FaceSigns& signs = kOutward);

/// Supremum of the stability ratio over polynomial data of degree
/// `data_degree` (generalized eigenvalue problem).
double local_stability_bound(const CellGeometry& geom, int r, int data_degree);

/// L2(K) norm squared of a local RT function given by local coefficients.
double local_rt_l2_squared(const CellGeometry& geom, int r, const Eigen::VectorXd& coeffs, int quad_degree);

}  // namespace rtmix
