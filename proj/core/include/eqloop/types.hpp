#pragma once

#include <Eigen/Dense>
#include <vector>

namespace eqloop {

inline constexpr int kMaxAmbientDim = 4;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Vector in the ambient Euclidean space. Stack storage, at most four components.
using Ambient = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbientDim, 1>;

/// Ambient-space linear map (Jacobians, rotations).
using AmbientMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim, kMaxAmbientDim>;

/// A vector field sampled along a loop: one ambient vector per grid point.
using LoopField = std::vector<Ambient>;

}  // namespace eqloop
