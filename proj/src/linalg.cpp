#include "ncadmm/linalg.hpp"

#include <cmath>

#include "ncadmm/errors.hpp"

namespace ncadmm {

double spectral_norm_symmetric(const Eigen::MatrixXd& Q, double rel_tol) {
  if (Q.rows() != Q.cols()) throw DimensionError("spectral_norm_symmetric: matrix not square");
  const Eigen::Index n = Q.rows();
  if (n == 0) return 0.0;

  // Deterministic start with a mild index-dependent tilt so the vector is
  // never orthogonal to the dominant eigenspace of a structured matrix.
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 1e-3 * static_cast<double>(i + 1);
  v.normalize();

  double est = 0.0;
  const long cap = 100000;
  for (long it = 0; it < cap; ++it) {
    Eigen::VectorXd w = Q * (Q * v);
    const double rayleigh = v.dot(w);  // estimates lambda_max(Q^2) = ||Q||^2
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = std::sqrt(std::max(rayleigh, 0.0));
    if (it > 0 && std::abs(next - est) <= rel_tol * std::max(1.0, next)) return next;
    est = next;
  }
  throw NumericError("spectral_norm_symmetric: power iteration did not converge");
}

double smallest_eigenvalue(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols()) throw DimensionError("smallest_eigenvalue: matrix not square");
  if (S.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("smallest_eigenvalue: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

double smallest_singular_value(const Eigen::MatrixXd& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues().minCoeff();
}

double largest_singular_value(const Eigen::MatrixXd& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  return svd.singularValues().maxCoeff();
}

}  // namespace ncadmm
