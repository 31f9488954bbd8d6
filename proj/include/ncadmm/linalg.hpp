#pragma once

#include <Eigen/Dense>

namespace ncadmm {

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix by
/// power iteration on Q^2, converged to the given relative tolerance.
/// Iterating on the square makes clustered +/-lambda pairs (which stall the
/// plain iteration) converge immediately. Throws NumericError on stall.
double spectral_norm_symmetric(const Eigen::MatrixXd& Q, double rel_tol = 1e-10);

/// Smallest eigenvalue of a symmetric matrix.
double smallest_eigenvalue(const Eigen::MatrixXd& S);

/// Smallest singular value of a (possibly rectangular) matrix.
double smallest_singular_value(const Eigen::MatrixXd& A);

/// Largest singular value of a (possibly rectangular) matrix.
double largest_singular_value(const Eigen::MatrixXd& A);

}  // namespace ncadmm
