#include "rtmix/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace rtmix {

std::vector<MultiIndex> homogeneous_exponents(int dim, int degree) {
  std::vector<MultiIndex> out;
  if (degree < 0) return out;
  if (dim == 1) {
    out.push_back({degree, 0, 0});
  } else if (dim == 2) {
    for (int a = degree; a >= 0; --a) out.push_back({a, degree - a, 0});
  } else {
    for (int a = degree; a >= 0; --a) {
      for (int b = degree - a; b >= 0; --b) out.push_back({a, b, degree - a - b});
    }
  }
  return out;
}

std::vector<MultiIndex> monomial_exponents(int dim, int max_degree) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_degree; ++k) {
    auto h = homogeneous_exponents(dim, k);
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

std::vector<MultiIndex> barycentric_indices(int n, int degree) {
  return homogeneous_exponents(n, degree);
}

void eval_monomials(const std::vector<MultiIndex>& exps, const Point& x, Eigen::Ref<Eigen::VectorXd> out) {
  const int d = static_cast<int>(x.size());
  std::array<std::array<double, 24>, 3> pw{};
  int maxp = 0;
  for (const auto& e : exps) maxp = std::max({maxp, e[0], e[1], e[2]});
  for (int k = 0; k < d; ++k) {
    pw[k][0] = 1.0;
    for (int p = 1; p <= maxp; ++p) pw[k][p] = pw[k][p - 1] * x[k];
  }
  for (int k = d; k < 3; ++k) pw[k][0] = 1.0;
  for (std::size_t m = 0; m < exps.size(); ++m) {
    out[m] = pw[0][exps[m][0]] * pw[1][exps[m][1]] * pw[2][exps[m][2]];
  }
}

void eval_monomial_gradients(const std::vector<MultiIndex>& exps, const Point& x,
                             Eigen::Ref<Eigen::MatrixXd> out) {
  const int d = static_cast<int>(x.size());
  std::array<std::array<double, 24>, 3> pw{};
  int maxp = 0;
  for (const auto& e : exps) maxp = std::max({maxp, e[0], e[1], e[2]});
  for (int k = 0; k < d; ++k) {
    pw[k][0] = 1.0;
    for (int p = 1; p <= maxp; ++p) pw[k][p] = pw[k][p - 1] * x[k];
  }
  for (int k = d; k < 3; ++k) pw[k][0] = 1.0;
  for (std::size_t m = 0; m < exps.size(); ++m) {
    const auto& e = exps[m];
    for (int k = 0; k < d; ++k) {
      if (e[k] == 0) {
        out(m, k) = 0.0;
        continue;
      }
      double v = e[k];
      for (int j = 0; j < 3; ++j) v *= (j == k) ? pw[j][e[j] - 1] : pw[j][e[j]];
      out(m, k) = v;
    }
  }
}

}  // namespace rtmix
