#pragma once

#include "rtmix/mesh.hpp"
#include "rtmix/types.hpp"

#include <vector>

namespace rtmix {

/// Quadrature on the reference simplex {x_i >= 0, sum x_i <= 1}.
/// Weights are positive and sum to the simplex measure 1/d!.
struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  std::vector<Point> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

inline constexpr int kMaxQuadratureDegree = 20;

/// Conical-product (collapsed Gauss-Jacobi) rule exact for total degree
/// `degree`; dim in {1, 2, 3}, 0 <= degree <= kMaxQuadratureDegree.
QuadratureRule simplex_rule(int dim, int degree);

/// Gauss-Jacobi nodes/weights on [0, 1] for the weight (1 - t)^alpha.
void gauss_jacobi_01(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights);

/// det(B)-weighted sum of f at the mapped quadrature points of a cell.
double integrate_on_cell(const SimplicialMesh& mesh, int cell, const ScalarFunction& f,
                         const QuadratureRule& rule);

}  // namespace rtmix
