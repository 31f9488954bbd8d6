#include "ncadmm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ncadmm/errors.hpp"
#include "ncadmm/linalg.hpp"

namespace ncadmm {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::string point_preview(const Vector& x) {
  std::ostringstream os;
  os << "[";
  const Eigen::Index show = std::min<Eigen::Index>(x.size(), 4);
  for (Eigen::Index i = 0; i < show; ++i) os << (i ? ", " : "") << x(i);
  if (x.size() > show) os << ", ...";
  os << "]";
  return os.str();
}

}  // namespace

double SmoothBlock::value(const Vector& x) const {
  if (kind == Kind::Quadratic) return quad->value(x);
  return value_fn(x);
}

Vector SmoothBlock::grad(const Vector& x) const {
  if (kind == Kind::Quadratic) return quad->grad(x);
  return grad_fn(x);
}

SmoothBlock quadratic_block(const Matrix& Q, const Vector& b, double c, double lipschitz,
                            bool is_convex) {
  if (Q.rows() != Q.cols()) throw DimensionError("quadratic_block: Q not square");
  if (b.size() != Q.rows()) throw DimensionError("quadratic_block: b does not match Q");
  if (!Q.isApprox(Q.transpose(), 1e-12)) throw ValidationError("quadratic_block: Q not symmetric");
  if (lipschitz < 0.0) throw ValidationError("quadratic_block: negative Lipschitz constant");
  SmoothBlock block;
  block.kind = SmoothBlock::Kind::Quadratic;
  block.dim = static_cast<int>(Q.rows());
  block.lipschitz = lipschitz;
  block.is_convex = is_convex;
  block.quad = QuadraticForm{Q, b, c};
  return block;
}

SmoothBlock custom_block(int dim, std::function<double(const Vector&)> value,
                         std::function<Vector(const Vector&)> grad, double lipschitz,
                         bool is_convex) {
  if (dim <= 0) throw DimensionError("custom_block: dim must be positive");
  if (!value || !grad) throw ValidationError("custom_block: missing value or gradient callable");
  if (lipschitz < 0.0) throw ValidationError("custom_block: negative Lipschitz constant");
  SmoothBlock block;
  block.kind = SmoothBlock::Kind::Custom;
  block.dim = dim;
  block.lipschitz = lipschitz;
  block.is_convex = is_convex;
  block.value_fn = std::move(value);
  block.grad_fn = std::move(grad);
  return block;
}

std::pair<double, Vector> eval_block(const SmoothBlock& block, const Vector& x) {
  if (x.size() != block.dim) throw DimensionError("eval_block: point dimension mismatch");
  const double v = block.value(x);
  Vector g = block.grad(x);
  if (g.size() != block.dim)
    throw DimensionError("eval_block: gradient dimension mismatch at " + point_preview(x));
  if (!std::isfinite(v) || !all_finite(g))
    throw NumericError("eval_block: non-finite value or gradient at " + point_preview(x));
  return {v, std::move(g)};
}

double Regularizer::value(const Vector& x) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::L1:
      return lambda * x.lpNorm<1>();
    case Kind::BoxIndicator: {
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) < lo(i) - 1e-12 || x(i) > hi(i) + 1e-12)
          return std::numeric_limits<double>::infinity();
      return 0.0;
    }
    case Kind::Custom:
      return value_fn(x);
  }
  return 0.0;
}

Vector Regularizer::prox(const Vector& z, double weight) const {
  switch (kind) {
    case Kind::Zero:
      return z;
    case Kind::L1:
      return soft_threshold(z, lambda * weight);
    case Kind::BoxIndicator:
      return clamp(z, lo, hi);
    case Kind::Custom:
      return prox_fn(z, weight);
  }
  return z;
}

Regularizer zero_regularizer(int dim) {
  if (dim <= 0) throw DimensionError("zero_regularizer: dim must be positive");
  Regularizer r;
  r.kind = Regularizer::Kind::Zero;
  r.dim = dim;
  return r;
}

Regularizer l1_regularizer(int dim, double lambda) {
  if (dim <= 0) throw DimensionError("l1_regularizer: dim must be positive");
  if (lambda < 0.0) throw ValidationError("l1_regularizer: negative weight");
  Regularizer r;
  r.kind = Regularizer::Kind::L1;
  r.dim = dim;
  r.lambda = lambda;
  return r;
}

Regularizer box_regularizer(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) throw DimensionError("box_regularizer: bound sizes differ");
  if (lo.size() == 0) throw DimensionError("box_regularizer: empty bounds");
  if ((lo.array() > hi.array()).any()) throw ValidationError("box_regularizer: lo exceeds hi");
  Regularizer r;
  r.kind = Regularizer::Kind::BoxIndicator;
  r.dim = static_cast<int>(lo.size());
  r.lo = lo;
  r.hi = hi;
  return r;
}

Regularizer custom_regularizer(int dim, std::function<double(const Vector&)> value,
                               std::function<Vector(const Vector&, double)> prox) {
  if (dim <= 0) throw DimensionError("custom_regularizer: dim must be positive");
  if (!value || !prox) throw ValidationError("custom_regularizer: missing callable");
  Regularizer r;
  r.kind = Regularizer::Kind::Custom;
  r.dim = dim;
  r.value_fn = std::move(value);
  r.prox_fn = std::move(prox);
  return r;
}

Vector apply_prox(const Regularizer& reg, const Vector& z, double weight) {
  if (z.size() != reg.dim) throw DimensionError("apply_prox: point dimension mismatch");
  if (!(weight > 0.0)) throw ValidationError("apply_prox: weight must be positive");
  Vector out = reg.prox(z, weight);
  if (out.size() != reg.dim)
    throw DimensionError("apply_prox: prox output dimension mismatch");
  if (!all_finite(out))
    throw NumericError("apply_prox: non-finite prox output at " + point_preview(z));
  return out;
}

Vector FeasibleSet::project(const Vector& z) const {
  if (z.size() != dim) throw DimensionError("FeasibleSet::project: dimension mismatch");
  switch (kind) {
    case Kind::WholeSpace:
      return z;
    case Kind::Box:
      return clamp(z, lo, hi);
    case Kind::Ball:
      return project_ball(z, center, radius);
  }
  return z;
}

bool FeasibleSet::contains(const Vector& z, double tol) const {
  if (z.size() != dim) throw DimensionError("FeasibleSet::contains: dimension mismatch");
  switch (kind) {
    case Kind::WholeSpace:
      return true;
    case Kind::Box:
      return (z.array() >= lo.array() - tol).all() && (z.array() <= hi.array() + tol).all();
    case Kind::Ball:
      return (z - center).norm() <= radius + tol;
  }
  return true;
}

FeasibleSet whole_space(int dim) {
  if (dim <= 0) throw DimensionError("whole_space: dim must be positive");
  FeasibleSet s;
  s.kind = FeasibleSet::Kind::WholeSpace;
  s.dim = dim;
  return s;
}

FeasibleSet box_set(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size()) throw DimensionError("box_set: bound sizes differ");
  if (lo.size() == 0) throw DimensionError("box_set: empty bounds");
  if ((lo.array() > hi.array()).any()) throw ValidationError("box_set: lo exceeds hi");
  FeasibleSet s;
  s.kind = FeasibleSet::Kind::Box;
  s.dim = static_cast<int>(lo.size());
  s.lo = lo;
  s.hi = hi;
  return s;
}

FeasibleSet box_set(int dim, double radius) {
  if (radius < 0.0) throw ValidationError("box_set: negative radius");
  return box_set(Vector::Constant(dim, -radius), Vector::Constant(dim, radius));
}

FeasibleSet ball_set(const Vector& center, double radius) {
  if (center.size() == 0) throw DimensionError("ball_set: empty center");
  if (radius <= 0.0) throw ValidationError("ball_set: radius must be positive");
  FeasibleSet s;
  s.kind = FeasibleSet::Kind::Ball;
  s.dim = static_cast<int>(center.size());
  s.center = center;
  s.radius = radius;
  return s;
}

namespace {

/// Dykstra-style splitting for prox of a sum of two prox-friendly functions.
/// Converges to argmin reg(x) + indicator_set(x) + (1/(2w))||x - v||^2.
Vector dykstra_combined_prox(const Regularizer& reg, const FeasibleSet& set, const Vector& v,
                             double weight, const InnerOptions& inner) {
  Vector x = v;
  Vector p = Vector::Zero(v.size());
  Vector q = Vector::Zero(v.size());
  double change = std::numeric_limits<double>::infinity();
  for (long it = 0; it < inner.max_iters; ++it) {
    const Vector y = reg.prox(x + p, weight);
    p = x + p - y;
    const Vector x_next = set.project(y + q);
    q = y + q - x_next;
    change = (x_next - x).norm();
    x = x_next;
    if (change <= 1e-13 * (1.0 + x.norm())) return x;
  }
  throw InnerSolveError("combined_prox: Dykstra splitting hit iteration cap", change,
                        inner.max_iters);
}

}  // namespace

Vector combined_prox(const Regularizer& reg, const FeasibleSet& set, const Vector& v,
                     double weight, const InnerOptions& inner) {
  if (reg.dim != set.dim) throw DimensionError("combined_prox: regularizer/set dimension mismatch");
  if (v.size() != reg.dim) throw DimensionError("combined_prox: point dimension mismatch");
  if (!(weight > 0.0)) throw ValidationError("combined_prox: weight must be positive");

  if (reg.is_zero()) return set.project(v);
  if (set.kind == FeasibleSet::Kind::WholeSpace) return apply_prox(reg, v, weight);

  if (set.kind == FeasibleSet::Kind::Box) {
    // Box constraints commute with separable proxes: the coordinatewise
    // minimizer of a 1-d convex function over an interval is the clamp of
    // its unconstrained minimizer.
    if (reg.kind == Regularizer::Kind::L1)
      return clamp(soft_threshold(v, reg.lambda * weight), set.lo, set.hi);
    if (reg.kind == Regularizer::Kind::BoxIndicator) {
      const Vector lo = reg.lo.cwiseMax(set.lo);
      const Vector hi = reg.hi.cwiseMin(set.hi);
      if ((lo.array() > hi.array()).any())
        throw ValidationError("combined_prox: box intersection is empty");
      return clamp(v, lo, hi);
    }
  }

  return dykstra_combined_prox(reg, set, v, weight, inner);
}

ConsensusProblem::ConsensusProblem(std::vector<SmoothBlock> blocks_in, Regularizer regularizer_in,
                                   FeasibleSet set_in)
    : blocks(std::move(blocks_in)), regularizer(std::move(regularizer_in)), set(std::move(set_in)) {
  if (blocks.empty()) throw DimensionError("ConsensusProblem: needs at least one block");
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].dim != set.dim)
      throw DimensionError("ConsensusProblem: block " + std::to_string(k + 1) +
                           " dimension differs from the shared variable");
  if (regularizer.dim != set.dim)
    throw DimensionError("ConsensusProblem: regularizer dimension differs from the set");
}

double ConsensusProblem::objective(const Vector& x) const {
  double v = regularizer.value(x);
  for (const auto& block : blocks) v += block.value(x);
  return v;
}

double SharingBlock::g_value(const Vector& x) const {
  return kind == Kind::Smooth ? g.value(x) : g_prox.value(x);
}

SharingBlock smooth_sharing_block(SmoothBlock g, Matrix A, FeasibleSet set) {
  if (g.dim != A.cols()) throw DimensionError("smooth_sharing_block: A columns differ from g dim");
  if (set.dim != g.dim) throw DimensionError("smooth_sharing_block: set dimension differs from g");
  SharingBlock b;
  b.kind = SharingBlock::Kind::Smooth;
  b.g = std::move(g);
  b.A = std::move(A);
  b.set = std::move(set);
  b.lambda_min_AtA = smallest_eigenvalue(b.A.transpose() * b.A);
  return b;
}

SharingBlock convex_prox_sharing_block(Regularizer g, Matrix A, FeasibleSet set) {
  if (g.dim != A.cols())
    throw DimensionError("convex_prox_sharing_block: A columns differ from g dim");
  if (set.dim != g.dim)
    throw DimensionError("convex_prox_sharing_block: set dimension differs from g");
  SharingBlock b;
  b.kind = SharingBlock::Kind::ConvexProx;
  b.g_prox = std::move(g);
  b.A = std::move(A);
  b.set = std::move(set);
  b.lambda_min_AtA = smallest_eigenvalue(b.A.transpose() * b.A);
  return b;
}

SharingProblem::SharingProblem(std::vector<SharingBlock> blocks_in, SmoothBlock coupling_in)
    : blocks(std::move(blocks_in)), coupling(std::move(coupling_in)) {
  if (blocks.empty()) throw DimensionError("SharingProblem: needs at least one block");
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].A.rows() != coupling.dim)
      throw DimensionError("SharingProblem: A_" + std::to_string(k + 1) +
                           " rows differ from the coupling dimension");
    if (blocks[k].lambda_min_AtA <= 0.0)
      throw ValidationError("SharingProblem: A_" + std::to_string(k + 1) +
                            " is column rank deficient");
  }
}

Vector SharingProblem::combine(const std::vector<Vector>& xs) const {
  if (xs.size() != blocks.size()) throw DimensionError("SharingProblem::combine: wrong block count");
  Vector s = Vector::Zero(m());
  for (std::size_t k = 0; k < blocks.size(); ++k) s += blocks[k].A * xs[k];
  return s;
}

double SharingProblem::objective(const std::vector<Vector>& xs) const {
  double v = coupling.value(combine(xs));
  for (std::size_t k = 0; k < blocks.size(); ++k) v += blocks[k].g_value(xs[k]);
  return v;
}

TwoBlockProblem::TwoBlockProblem(Regularizer f_in, FeasibleSet set_in, SmoothBlock g_in,
                                 Matrix B_in, Matrix A_in, Vector c_in)
    : f(std::move(f_in)),
      set(std::move(set_in)),
      g(std::move(g_in)),
      B(std::move(B_in)),
      A(std::move(A_in)),
      c(std::move(c_in)) {
  if (A.rows() != A.cols()) throw DimensionError("TwoBlockProblem: A must be square");
  if (B.rows() != A.rows()) throw DimensionError("TwoBlockProblem: B rows differ from A");
  if (c.size() != A.rows()) throw DimensionError("TwoBlockProblem: c dimension differs from A");
  if (g.dim != A.cols()) throw DimensionError("TwoBlockProblem: g dimension differs from A");
  if (f.dim != B.cols()) throw DimensionError("TwoBlockProblem: f dimension differs from B");
  if (set.dim != f.dim) throw DimensionError("TwoBlockProblem: set dimension differs from f");
  lambda_min_AAt = smallest_eigenvalue(A * A.transpose());
  if (lambda_min_AAt <= 1e-12) throw ValidationError("TwoBlockProblem: A is singular");
}

}  // namespace ncadmm
