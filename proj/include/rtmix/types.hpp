#pragma once

#include <Eigen/Core>

#include <functional>

namespace rtmix {

// Runtime-sized, stack-allocated small vectors/matrices (dimension <= 3).
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Point = SmallVec;

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<SmallVec(const Point&)>;
using SpaceTimeScalar = std::function<double(const Point&, double)>;
using SpaceTimeVector = std::function<SmallVec(const Point&, double)>;

}  // namespace rtmix
