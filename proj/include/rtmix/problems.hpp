#pragma once

#include "rtmix/assembly.hpp"
#include "rtmix/projection.hpp"

#include <string_view>

namespace rtmix {

/// u = e^t x y (1-x)(1-y) on the unit square.
ExactSolutionSpec allen_cahn_2d_solution();
/// f = u^3
NonlinearitySpec allen_cahn_2d_nonlinearity();

/// u = e^{-t} sin(pi x) sin(2 pi y) z (1-z) on the unit cube.
ExactSolutionSpec combined_3d_solution();
/// f = (b . grad u) u + u^3 - u with b = (1, 1, 1)
NonlinearitySpec combined_3d_nonlinearity();

/// u = 0
ExactSolutionSpec zero_solution();

/// Looks up a solution by name: allen_cahn_2d, combined_3d or zero.
/// Throws InvalidArgument for unknown names.
ExactSolutionSpec solution_by_name(std::string_view name);

}  // namespace rtmix
