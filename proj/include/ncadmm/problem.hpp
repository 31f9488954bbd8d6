#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncadmm/prox.hpp"

namespace ncadmm {

/// g(x) = 0.5 x'Qx + b'x + c with symmetric Q. Kept alongside the callable
/// form so solvers can use direct factorizations for quadratic subproblems.
struct QuadraticForm {
  Matrix Q;
  Vector b;
  double c = 0.0;

  double value(const Vector& x) const { return 0.5 * x.dot(Q * x) + b.dot(x) + c; }
  Vector grad(const Vector& x) const { return Q * x + b; }
};

/// A smooth component function with a known gradient Lipschitz constant.
///
/// The Lipschitz constant is a required input: callers construct blocks from
/// data they understand, and the benchmark generators compute it analytically
/// for every family they emit. validate() cross-checks it by sampling.
struct SmoothBlock {
  enum class Kind {
    Quadratic,  ///< quad holds the data; closed-form subproblem solves apply
    Custom,     ///< value_fn/grad_fn only; subproblems fall back to inner solves
  };

  Kind kind = Kind::Custom;
  int dim = 0;
  double lipschitz = 0.0;  ///< Lipschitz constant of the gradient
  bool is_convex = false;
  std::optional<QuadraticForm> quad;
  std::function<double(const Vector&)> value_fn;
  std::function<Vector(const Vector&)> grad_fn;

  double value(const Vector& x) const;
  Vector grad(const Vector& x) const;
};

/// Builds a quadratic SmoothBlock; Q must be symmetric, lipschitz its
/// spectral norm (or any valid upper bound).
SmoothBlock quadratic_block(const Matrix& Q, const Vector& b, double c, double lipschitz,
                            bool is_convex);

/// Builds a SmoothBlock from callables.
SmoothBlock custom_block(int dim, std::function<double(const Vector&)> value,
                         std::function<Vector(const Vector&)> grad, double lipschitz,
                         bool is_convex);

/// Evaluates value and gradient with finiteness checks; throws NumericError
/// naming the offending point otherwise.
std::pair<double, Vector> eval_block(const SmoothBlock& block, const Vector& x);

/// A convex regularizer with an exact proximal map.
///
/// prox(z, w) = argmin_x value(x) + (1/(2w)) ||x - z||^2, w > 0.
struct Regularizer {
  enum class Kind { Zero, L1, BoxIndicator, Custom };

  Kind kind = Kind::Zero;
  int dim = 0;
  double lambda = 0.0;  ///< L1 weight
  Vector lo, hi;        ///< BoxIndicator bounds
  std::function<double(const Vector&)> value_fn;
  std::function<Vector(const Vector&, double)> prox_fn;

  double value(const Vector& x) const;
  Vector prox(const Vector& z, double weight) const;
  bool is_zero() const { return kind == Kind::Zero; }
  /// True when the prox of (this + box indicator) has a closed form.
  bool separable() const { return kind != Kind::Custom; }
};

Regularizer zero_regularizer(int dim);
Regularizer l1_regularizer(int dim, double lambda);
Regularizer box_regularizer(const Vector& lo, const Vector& hi);
Regularizer custom_regularizer(int dim, std::function<double(const Vector&)> value,
                               std::function<Vector(const Vector&, double)> prox);

/// Applies a prox with argument checks. Throws on w <= 0 or non-finite output.
Vector apply_prox(const Regularizer& reg, const Vector& z, double weight);

/// A closed convex feasible set with an exact Euclidean projection.
struct FeasibleSet {
  enum class Kind { WholeSpace, Box, Ball };

  Kind kind = Kind::WholeSpace;
  int dim = 0;
  Vector lo, hi;     ///< Box bounds
  Vector center;     ///< Ball center
  double radius = 0.0;

  Vector project(const Vector& z) const;
  bool contains(const Vector& z, double tol = 1e-12) const;
  bool is_compact() const { return kind != Kind::WholeSpace; }
};

FeasibleSet whole_space(int dim);
FeasibleSet box_set(const Vector& lo, const Vector& hi);
/// Symmetric box [-radius, radius]^dim.
FeasibleSet box_set(int dim, double radius);
FeasibleSet ball_set(const Vector& center, double radius);

/// Options for iterative fallbacks inside otherwise closed-form operations.
struct InnerOptions {
  double tol = 1e-10;     ///< target: ||subproblem gradient|| <= tol * (1 + ||x||)
  long max_iters = 50000; ///< hard cap; exceeding it throws InnerSolveError
};

/// prox of (reg + indicator of set) at v with the given weight:
///   argmin_{x in set} reg(x) + (1/(2w)) ||x - v||^2.
/// Closed forms cover every built-in combination except ball sets with a
/// nonzero regularizer, which run a Dykstra-style splitting to tolerance.
Vector combined_prox(const Regularizer& reg, const FeasibleSet& set, const Vector& v,
                     double weight, const InnerOptions& inner = {});

/// min_k g_k(x) + h(x) over x in X, all blocks sharing one variable of
/// dimension n; the solver enforces the consensus copies.
struct ConsensusProblem {
  std::vector<SmoothBlock> blocks;  ///< K blocks, all of dimension n
  Regularizer regularizer;          ///< h; use zero_regularizer for none
  FeasibleSet set;                  ///< X

  ConsensusProblem(std::vector<SmoothBlock> blocks, Regularizer regularizer, FeasibleSet set);

  int dim() const { return set.dim; }
  int num_blocks() const { return static_cast<int>(blocks.size()); }
  /// f(x) = sum_k g_k(x) + h(x).
  double objective(const Vector& x) const;
};

/// One block of a sharing problem: a component function over its own
/// variable x_k in X_k, entering the coupling through A_k x_k.
struct SharingBlock {
  enum class Kind {
    Smooth,      ///< g holds the block function (possibly nonconvex)
    ConvexProx,  ///< g_prox holds a convex function with an exact prox
  };

  Kind kind = Kind::Smooth;
  SmoothBlock g;       ///< Smooth kind
  Regularizer g_prox;  ///< ConvexProx kind
  Matrix A;            ///< M x N_k coupling matrix, full column rank
  FeasibleSet set;     ///< X_k
  double lambda_min_AtA = 0.0;  ///< smallest eigenvalue of A'A, stored at construction

  int dim() const { return static_cast<int>(A.cols()); }
  double g_value(const Vector& x) const;
};

SharingBlock smooth_sharing_block(SmoothBlock g, Matrix A, FeasibleSet set);
SharingBlock convex_prox_sharing_block(Regularizer g, Matrix A, FeasibleSet set);

/// min sum_k g_k(x_k) + l(sum_k A_k x_k) with x_k in X_k.
struct SharingProblem {
  std::vector<SharingBlock> blocks;
  SmoothBlock coupling;  ///< l, dimension M

  SharingProblem(std::vector<SharingBlock> blocks, SmoothBlock coupling);

  int m() const { return coupling.dim; }
  int num_blocks() const { return static_cast<int>(blocks.size()); }
  Vector combine(const std::vector<Vector>& xs) const;  ///< sum_k A_k x_k
  double objective(const std::vector<Vector>& xs) const;
};

/// min f(x1) + g(x2) subject to B x1 + A x2 = c, x1 in X, with A invertible.
struct TwoBlockProblem {
  Regularizer f;    ///< convex, possibly nonsmooth, dimension N1
  FeasibleSet set;  ///< X for x1
  SmoothBlock g;    ///< dimension N2 = M
  Matrix B;         ///< M x N1
  Matrix A;         ///< M x M, invertible
  Vector c;         ///< dimension M
  double lambda_min_AAt = 0.0;  ///< smallest eigenvalue of AA', stored at construction

  TwoBlockProblem(Regularizer f, FeasibleSet set, SmoothBlock g, Matrix B, Matrix A, Vector c);

  int n1() const { return static_cast<int>(B.cols()); }
  int m() const { return static_cast<int>(A.rows()); }
};

}  // namespace ncadmm
