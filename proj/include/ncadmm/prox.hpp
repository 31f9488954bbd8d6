#pragma once

#include <Eigen/Dense>

namespace ncadmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Elementwise soft threshold: sign(z_i) * max(|z_i| - t, 0).
Vector soft_threshold(const Vector& z, double t);

/// Elementwise clamp to [lo_i, hi_i].
Vector clamp(const Vector& z, const Vector& lo, const Vector& hi);

/// Euclidean projection onto the ball of the given center and radius.
Vector project_ball(const Vector& z, const Vector& center, double radius);

}  // namespace ncadmm
