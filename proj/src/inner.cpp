#include "ncadmm/inner.hpp"

#include <cmath>

#include "ncadmm/errors.hpp"

namespace ncadmm {

Vector minimize_strongly_convex(const std::function<Vector(const Vector&)>& grad,
                                const Vector& start, double step, const InnerOptions& inner) {
  Vector x = start;
  double res = 0.0;
  for (long it = 0; it < inner.max_iters; ++it) {
    const Vector g = grad(x);
    res = g.norm();
    if (res <= inner.tol * (1.0 + x.norm())) return x;
    x -= step * g;
  }
  throw InnerSolveError("minimize_strongly_convex: iteration cap reached", res,
                        inner.max_iters);
}

Vector minimize_projected(const std::function<Vector(const Vector&)>& grad,
                          const FeasibleSet& set, const Vector& start, double step,
                          const InnerOptions& inner) {
  Vector x = set.project(start);
  double res = 0.0;
  for (long it = 0; it < inner.max_iters; ++it) {
    const Vector next = set.project(x - step * grad(x));
    res = (x - next).norm() / step;
    x = next;
    if (res <= inner.tol * (1.0 + x.norm())) return x;
  }
  throw InnerSolveError("minimize_projected: iteration cap reached", res, inner.max_iters);
}

Vector minimize_proximal(const std::function<Vector(const Vector&)>& smooth_grad,
                         const Regularizer& reg, const FeasibleSet& set, const Vector& start,
                         double step, const InnerOptions& inner) {
  Vector x = start;
  double res = 0.0;
  for (long it = 0; it < inner.max_iters; ++it) {
    const Vector next = combined_prox(reg, set, x - step * smooth_grad(x), step, inner);
    res = (x - next).norm() / step;
    x = next;
    if (res <= inner.tol * (1.0 + x.norm())) return x;
  }
  throw InnerSolveError("minimize_proximal: iteration cap reached", res, inner.max_iters);
}

Vector minimize_fista(const std::function<Vector(const Vector&)>& smooth_grad,
                      const Regularizer& reg, const FeasibleSet& set, const Vector& start,
                      double step, const InnerOptions& inner) {
  Vector x = start;
  Vector z = start;
  double theta = 1.0;
  double res = 0.0;
  for (long it = 0; it < inner.max_iters; ++it) {
    const Vector g = smooth_grad(z);
    const Vector next = combined_prox(reg, set, z - step * g, step, inner);
    res = (next - z).norm() / step;
    if (res <= inner.tol * (1.0 + next.norm())) {
      // The extrapolated residual can flatter the iterate; confirm the plain
      // prox-step residual at the candidate before accepting it.
      const Vector check = combined_prox(reg, set, next - step * smooth_grad(next), step, inner);
      res = (next - check).norm() / step;
      if (res <= inner.tol * (1.0 + next.norm())) return next;
    }
    if (g.dot(next - x) > 0.0) theta = 1.0;  // adaptive restart
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    z = next + ((theta - 1.0) / theta_next) * (next - x);
    theta = theta_next;
    x = next;
  }
  throw InnerSolveError("minimize_fista: iteration cap reached", res, inner.max_iters);
}

}  // namespace ncadmm
