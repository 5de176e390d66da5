#include "rtmix/quadrature.hpp"

#include "rtmix/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace rtmix {

void gauss_jacobi_01(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch on [-1, 1] with Jacobi weight (1 - x)^alpha (1 + x)^0.
  const double a = alpha;
  const double b = 0.0;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    J(k, k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    if (k + 1 < n) {
      const double m = k + 1.0;
      const double t = 2.0 * m + a + b;
      const double off = std::sqrt(4.0 * m * (m + a) * (m + b) * (m + a + b) /
                                   (t * t * (t + 1.0) * (t - 1.0)));
      J(k, k + 1) = off;
      J(k + 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  // mu0 = integral of (1 - x)^alpha over [-1, 1]
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  // Map to [0, 1]: t = (1 + x) / 2, (1 - x)^alpha = 2^alpha (1 - t)^alpha, dx = 2 dt.
  const double scale = std::pow(2.0, -(a + 1.0));
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    const double v0 = eig.eigenvectors()(0, k);
    nodes[k] = 0.5 * (1.0 + eig.eigenvalues()(k));
    weights[k] = mu0 * v0 * v0 * scale;
  }
}

namespace {

QuadratureRule build_rule(int dim, int degree) {
  const int n = degree / 2 + 1;
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = degree;
  std::vector<double> x0, w0, x1, w1, x2, w2;
  gauss_jacobi_01(n, 0, x0, w0);
  if (dim == 1) {
    for (int i = 0; i < n; ++i) {
      Point p(1);
      p << x0[i];
      rule.points.push_back(p);
      rule.weights.push_back(w0[i]);
    }
  } else if (dim == 2) {
    gauss_jacobi_01(n, 1, x1, w1);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        Point p(2);
        p << x0[i] * (1.0 - x1[j]), x1[j];
        rule.points.push_back(p);
        rule.weights.push_back(w0[i] * w1[j]);
      }
    }
  } else {
    gauss_jacobi_01(n, 1, x1, w1);
    gauss_jacobi_01(n, 2, x2, w2);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          Point p(3);
          const double z = x2[k];
          const double y = x1[j] * (1.0 - z);
          const double x = x0[i] * (1.0 - x1[j]) * (1.0 - z);
          p << x, y, z;
          rule.points.push_back(p);
          rule.weights.push_back(w0[i] * w1[j] * w2[k]);
        }
      }
    }
  }
  return rule;
}

}  // namespace

QuadratureRule simplex_rule(int dim, int degree) {
  if (dim < 1 || dim > 3) {
    throw InvalidArgument("simplex_rule: dimension " + std::to_string(dim) + " not in {1,2,3}");
  }
  if (degree < 0 || degree > kMaxQuadratureDegree) {
    throw InvalidArgument("simplex_rule: degree " + std::to_string(degree) + " not in [0, " +
                          std::to_string(kMaxQuadratureDegree) + "]");
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({dim, degree});
  if (it == cache.end()) it = cache.emplace(std::pair{dim, degree}, build_rule(dim, degree)).first;
  return it->second;
}

double integrate_on_cell(const SimplicialMesh& mesh, int cell, const ScalarFunction& f,
                         const QuadratureRule& rule) {
  if (rule.dim != mesh.dim()) throw InvalidArgument("integrate_on_cell: rule dimension mismatch");
  if (cell < 0 || cell >= mesh.num_cells()) throw InvalidArgument("integrate_on_cell: bad cell");
  const CellGeometry& g = mesh.geometry(cell);
  double sum = 0.0;
  for (int q = 0; q < rule.size(); ++q) sum += rule.weights[q] * f(g.map(rule.points[q]));
  return sum * g.det_B;
}

}  // namespace rtmix
