#pragma once

#include <functional>

#include "ncadmm/problem.hpp"

namespace ncadmm {

/// Gradient descent on a strongly convex smooth function with the given step
/// (normally 1 / smoothness). Stops at ||grad|| <= tol * (1 + ||x||);
/// exceeding the cap throws InnerSolveError.
Vector minimize_strongly_convex(const std::function<Vector(const Vector&)>& grad,
                                const Vector& start, double step, const InnerOptions& inner);

/// Projected gradient descent over a feasible set; stops when the projected
/// step ||x - proj(x - step grad)|| / step falls below tol * (1 + ||x||).
Vector minimize_projected(const std::function<Vector(const Vector&)>& grad,
                          const FeasibleSet& set, const Vector& start, double step,
                          const InnerOptions& inner);

/// Proximal gradient on smooth + (reg restricted to set), using the combined
/// prox. Stops on the prox-step residual, same scaling as above.
Vector minimize_proximal(const std::function<Vector(const Vector&)>& smooth_grad,
                         const Regularizer& reg, const FeasibleSet& set, const Vector& start,
                         double step, const InnerOptions& inner);

/// Accelerated proximal gradient with gradient-based adaptive restart.
/// Same objective, stopping rule, and failure behavior as minimize_proximal.
Vector minimize_fista(const std::function<Vector(const Vector&)>& smooth_grad,
                      const Regularizer& reg, const FeasibleSet& set, const Vector& start,
                      double step, const InnerOptions& inner);

}  // namespace ncadmm
