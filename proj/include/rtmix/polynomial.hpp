#pragma once

#include "rtmix/types.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace rtmix {

using MultiIndex = std::array<int, 3>;

/// Exponents of all monomials in `dim` variables with total degree <= max_degree,
/// ordered by total degree and then lexicographically.
std::vector<MultiIndex> monomial_exponents(int dim, int max_degree);

/// Exponents with total degree exactly `degree` (homogeneous part).
std::vector<MultiIndex> homogeneous_exponents(int dim, int degree);

/// Multi-indices over `n` barycentric coordinates summing to `degree`,
/// in a fixed (lexicographically descending) order.
std::vector<MultiIndex> barycentric_indices(int n, int degree);

/// Values of the monomials at x.
void eval_monomials(const std::vector<MultiIndex>& exps, const Point& x, Eigen::Ref<Eigen::VectorXd> out);

/// Gradients of the monomials at x: out(m, k) = d/dx_k of monomial m.
void eval_monomial_gradients(const std::vector<MultiIndex>& exps, const Point& x,
                             Eigen::Ref<Eigen::MatrixXd> out);

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace rtmix
