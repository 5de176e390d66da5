#include "rtmix/problems.hpp"

#include "rtmix/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rtmix {

ExactSolutionSpec allen_cahn_2d_solution() {
  ExactSolutionSpec s;
  s.u = [](const Point& p, double t) { return std::exp(t) * p[0] * p[1] * (1 - p[0]) * (1 - p[1]); };
  s.u_t = s.u;
  s.grad_u = [](const Point& p, double t) {
    const double x = p[0], y = p[1], e = std::exp(t);
    SmallVec g(2);
    g << e * y * (1 - y) * (1 - 2 * x), e * x * (1 - x) * (1 - 2 * y);
    return g;
  };
  s.laplace_u = [](const Point& p, double t) {
    const double x = p[0], y = p[1];
    return -2.0 * std::exp(t) * (y * (1 - y) + x * (1 - x));
  };
  return s;
}

NonlinearitySpec allen_cahn_2d_nonlinearity() {
  NonlinearitySpec f;
  f.cubic = true;
  return f;
}

ExactSolutionSpec combined_3d_solution() {
  using std::numbers::pi;
  ExactSolutionSpec s;
  s.u = [](const Point& p, double t) {
    return std::exp(-t) * std::sin(pi * p[0]) * std::sin(2 * pi * p[1]) * p[2] * (1 - p[2]);
  };
  s.u_t = [u = s.u](const Point& p, double t) { return -u(p, t); };
  s.grad_u = [](const Point& p, double t) {
    const double e = std::exp(-t);
    const double sx = std::sin(pi * p[0]), cx = std::cos(pi * p[0]);
    const double sy = std::sin(2 * pi * p[1]), cy = std::cos(2 * pi * p[1]);
    const double z = p[2], w = z * (1 - z);
    SmallVec g(3);
    g << e * pi * cx * sy * w, e * 2 * pi * sx * cy * w, e * sx * sy * (1 - 2 * z);
    return g;
  };
  s.laplace_u = [](const Point& p, double t) {
    const double S = std::sin(pi * p[0]) * std::sin(2 * pi * p[1]);
    const double z = p[2];
    return std::exp(-t) * (-5 * pi * pi * S * z * (1 - z) - 2 * S);
  };
  return s;
}

NonlinearitySpec combined_3d_nonlinearity() {
  NonlinearitySpec f;
  f.advection = true;
  f.cubic = true;
  f.linear_shift = true;
  return f;
}

ExactSolutionSpec zero_solution() {
  ExactSolutionSpec s;
  s.u = [](const Point&, double) { return 0.0; };
  s.u_t = s.u;
  s.laplace_u = s.u;
  s.grad_u = [](const Point& p, double) { return SmallVec(SmallVec::Zero(p.size())); };
  return s;
}

ExactSolutionSpec solution_by_name(std::string_view name) {
  if (name == "allen_cahn_2d") return allen_cahn_2d_solution();
  if (name == "combined_3d") return combined_3d_solution();
  if (name == "zero") return zero_solution();
  throw InvalidArgument("unknown solution '" + std::string(name) + "'");
}

}  // namespace rtmix
