#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace kornlab {

using Real = double;

using Vec2 = Eigen::Matrix<Real, 2, 1>;
using Vec3 = Eigen::Matrix<Real, 3, 1>;
using Mat2 = Eigen::Matrix<Real, 2, 2>;
using Mat3 = Eigen::Matrix<Real, 3, 3>;
using VecX = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using MatX = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using ArrayX = Eigen::Array<Real, Eigen::Dynamic, 1>;

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad surface/domain construction input (unknown kind, missing parameter, ...).
struct geometry_error : error {
    using error::error;
};

/// A built object violates one of its stated bounds.
struct validation_error : error {
    using error::error;
};

/// The normal-coordinate Jacobian factor degenerated (1 + t*kappa too small).
struct singularity_error : error {
    using error::error;
};

/// Non-finite value met while evaluating an integrand or field.
struct evaluation_error : error {
    using error::error;
};

/// A linear or eigenvalue solve failed to converge.
struct solver_error : error {
    using error::error;
};

/// An operation that needs a nonzero field received a (numerically) zero one.
struct degenerate_field_error : error {
    using error::error;
};

/// Invalid user-facing configuration or CLI usage.
struct usage_error : error {
    using error::error;
};

} // namespace kornlab
