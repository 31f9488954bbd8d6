#include "ncadmm/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncadmm/errors.hpp"
#include "ncadmm/linalg.hpp"

namespace ncadmm {

namespace {

/// Random quadratic with eigenvalues drawn from [-nonconvexity, 1]; sharp
/// pins the extremes.
SmoothDesc random_quadratic(int dim, double nonconvexity, bool sharp, Rng& rng) {
  const Matrix U = random_orthogonal(dim, rng);
  Vector d = rng.uniform_vector(dim, -nonconvexity, 1.0);
  if (sharp && dim >= 2) {
    d(0) = -nonconvexity;
    d(1) = 1.0;
  }
  const Matrix raw = U * d.asDiagonal() * U.transpose();
  const Matrix Q = 0.5 * (raw + raw.transpose());
  const Vector b = rng.normal_vector(dim);
  // Tiny inflation keeps the constant an upper bound after the symmetrizing
  // round-off.
  const double lipschitz = d.cwiseAbs().maxCoeff() * (1.0 + 1e-10);
  const bool convex = d.minCoeff() >= 0.0;
  return quadratic_desc(Q, b, 0.0, lipschitz, convex);
}

double coordinate_min(double q, double b, double l1, double r) {
  double best = 0.0;  // t = 0
  auto consider = [&](double t) {
    const double v = 0.5 * q * t * t + b * t + l1 * std::abs(t);
    best = std::min(best, v);
  };
  consider(r);
  consider(-r);
  if (q > 0.0) {
    const double up = -(b + l1) / q;  // stationary point of the t > 0 branch
    if (up > 0.0 && up < r) consider(up);
    const double down = -(b - l1) / q;
    if (down < 0.0 && down > -r) consider(down);
  }
  return best;
}

}  // namespace

double quadratic_box_lower_bound(const Matrix& Q, const Vector& b, double c, double l1_weight,
                                 double radius) {
  if (radius <= 0.0) throw ValidationError("quadratic_box_lower_bound needs a positive radius");
  const int n = static_cast<int>(Q.rows());
  const double r = radius;

  double eigen_bound = 0.5 * std::min(0.0, smallest_eigenvalue(Q)) * n * r * r;
  for (int i = 0; i < n; ++i) {
    eigen_bound += r * std::min(0.0, l1_weight - std::abs(b(i)));
  }

  double off = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) off += std::abs(Q(i, j));
    }
  }
  double coord_bound = -0.5 * off * r * r;
  for (int i = 0; i < n; ++i) {
    coord_bound += coordinate_min(Q(i, i), b(i), l1_weight, r);
  }

  return std::max(eigen_bound, coord_bound) + c;
}

Matrix random_orthogonal(int n, Rng& rng) {
  const Matrix M = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix R = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

ConsensusDesc quadratic_consensus_desc(const QuadraticFamilyOptions& options,
                                       std::uint64_t seed) {
  if (options.num_blocks < 1 || options.dim < 1) {
    throw ValidationError("quadratic family needs at least one block and one dimension");
  }
  if (options.box_radius <= 0.0) {
    throw ValidationError("quadratic family needs a positive box radius");
  }
  if (options.nonconvexity < 0.0) {
    throw ValidationError("nonconvexity must be nonnegative");
  }

  Rng rng(seed);
  const int n = options.dim;
  ConsensusDesc desc;
  Matrix Q_sum = Matrix::Zero(n, n);
  Vector b_sum = Vector::Zero(n);
  for (int k = 0; k < options.num_blocks; ++k) {
    desc.blocks.push_back(random_quadratic(n, options.nonconvexity, options.sharp, rng));
    Q_sum += desc.blocks.back().Q;
    b_sum += desc.blocks.back().b;
  }
  desc.regularizer = options.l1_weight > 0.0 ? l1_regularizer(n, options.l1_weight)
                                             : zero_regularizer(n);
  desc.set = box_set(n, options.box_radius);
  desc.f_lower =
      quadratic_box_lower_bound(Q_sum, b_sum, 0.0, options.l1_weight, options.box_radius);
  desc.family = options.sharp ? "quadratic-sharp" : "quadratic";
  return desc;
}

ConsensusDesc sigmoid_consensus_desc(const SigmoidFamilyOptions& options, std::uint64_t seed) {
  if (options.num_blocks < 1 || options.dim < 1 || options.terms < 1) {
    throw ValidationError("sigmoid family needs positive block, dimension, and term counts");
  }
  if (options.box_radius <= 0.0) {
    throw ValidationError("sigmoid family needs a positive box radius");
  }

  Rng rng(seed);
  ConsensusDesc desc;
  for (int k = 0; k < options.num_blocks; ++k) {
    const Matrix A = rng.normal_matrix(options.terms, options.dim);
    const Vector offsets = rng.normal_vector(options.terms);
    desc.blocks.push_back(sigmoid_desc(A, offsets));
  }
  desc.regularizer = zero_regularizer(options.dim);
  desc.set = box_set(options.dim, options.box_radius);
  // Every logistic term is positive, so zero bounds the sum from below.
  desc.f_lower = 0.0;
  desc.family = "sigmoid";
  return desc;
}

SharingDesc sharing_desc(const SharingFamilyOptions& options, std::uint64_t seed) {
  if (options.num_blocks < 1 || options.block_dim < 1 || options.m < 1) {
    throw ValidationError("sharing family needs positive block count and dimensions");
  }
  if (options.block_dim > options.m) {
    throw ValidationError("sharing family needs block_dim <= m for full column rank");
  }
  if (options.num_prox_blocks < 0 || options.num_prox_blocks > options.num_blocks) {
    throw ValidationError("num_prox_blocks out of range");
  }
  if (options.box_radius <= 0.0) {
    throw ValidationError("sharing family needs a positive box radius");
  }

  Rng rng(seed);
  SharingDesc desc;
  desc.f_lower = 0.0;
  for (int k = 0; k < options.num_blocks; ++k) {
    SharingBlockDesc block;
    do {
      block.A = rng.normal_matrix(options.m, options.block_dim) / std::sqrt(options.m);
    } while (smallest_singular_value(block.A) < 0.1);
    block.set = box_set(options.block_dim, options.box_radius);

    if (k >= options.num_blocks - options.num_prox_blocks) {
      block.is_prox = true;
      block.g_prox = l1_regularizer(options.block_dim, options.l1_weight);
      // l1 is nonnegative; contributes nothing to the lower bound.
    } else {
      block.g = random_quadratic(options.block_dim, options.nonconvexity, false, rng);
      desc.f_lower +=
          quadratic_box_lower_bound(block.g.Q, block.g.b, 0.0, 0.0, options.box_radius);
    }
    desc.blocks.push_back(std::move(block));
  }

  const Vector target = rng.normal_vector(options.m);
  if (options.nonconvex_coupling) {
    desc.coupling = cos_ripple_desc(target, options.ripple);
    // cos <= 1 and the tracking term is nonnegative.
    desc.f_lower += -options.ripple * options.m;
    desc.family = "sharing-cos";
  } else {
    desc.coupling = quadratic_desc(Matrix::Identity(options.m, options.m), -target,
                                   0.5 * target.squaredNorm(), 1.0, true);
    desc.family = options.num_prox_blocks > 0 ? "sharing-mixed" : "sharing-quadratic";
  }
  return desc;
}

TwoBlockDesc two_block_desc(const TwoBlockFamilyOptions& options, std::uint64_t seed) {
  if (options.n1 < 1 || options.m < 1) {
    throw ValidationError("two-block family needs positive dimensions");
  }
  if (options.n1 > options.m) {
    throw ValidationError("two-block family needs n1 <= m for full column rank");
  }
  if (options.box_radius <= 0.0) {
    throw ValidationError("two-block family needs a positive box radius");
  }

  Rng rng(seed);
  TwoBlockDesc desc;
  const Matrix U = random_orthogonal(options.m, rng);
  const Vector d = rng.uniform_vector(options.m, 0.5, 1.5);
  desc.A = U * d.asDiagonal();

  do {
    desc.B = rng.normal_matrix(options.m, options.n1) / std::sqrt(options.m);
  } while (smallest_singular_value(desc.B) < 0.3);
  desc.c = rng.normal_vector(options.m);

  // g pins its top eigenvalue at 1, so the concavity-to-Lipschitz ratio never
  // exceeds the nonconvexity knob. The default keeps that ratio below the 1/6
  // threshold at which the 1.5-margin penalty rule stops certifying descent.
  {
    const Matrix Ug = random_orthogonal(options.m, rng);
    Vector dg = rng.uniform_vector(options.m, -std::max(options.nonconvexity, 0.0), 1.0);
    dg(0) = 1.0;
    const Matrix raw = Ug * dg.asDiagonal() * Ug.transpose();
    const Matrix Qg = 0.5 * (raw + raw.transpose());
    const double lipschitz = dg.cwiseAbs().maxCoeff() * (1.0 + 1e-10);
    desc.g = quadratic_desc(Qg, rng.normal_vector(options.m), 0.0, lipschitz,
                            dg.minCoeff() >= 0.0);
  }
  desc.f = l1_regularizer(options.n1, options.l1_weight);
  desc.set = box_set(options.n1, options.box_radius);

  // Every reachable x2 = A^{-1}(c - B x1) with x1 in the box lies in this
  // ball, which makes the quadratic part boundable.
  const double reach = (desc.c.norm() + largest_singular_value(desc.B) * options.box_radius *
                                            std::sqrt(static_cast<double>(options.n1))) /
                       d.minCoeff();
  const double lmin = smallest_eigenvalue(desc.g.Q);
  desc.f_lower = 0.5 * std::min(0.0, lmin) * reach * reach - desc.g.b.norm() * reach;
  desc.family = "two-block";
  return desc;
}

ConsensusDesc make_consensus_desc(const std::string& family, std::uint64_t seed) {
  if (family == "quadratic") return quadratic_consensus_desc({}, seed);
  if (family == "quadratic-sharp") {
    QuadraticFamilyOptions options;
    options.sharp = true;
    return quadratic_consensus_desc(options, seed);
  }
  if (family == "sigmoid") return sigmoid_consensus_desc({}, seed);
  throw ValidationError("unknown consensus family: " + family);
}

SharingDesc make_sharing_desc(const std::string& family, std::uint64_t seed) {
  if (family == "sharing-quadratic") return sharing_desc({}, seed);
  if (family == "sharing-cos") {
    SharingFamilyOptions options;
    options.nonconvex_coupling = true;
    return sharing_desc(options, seed);
  }
  if (family == "sharing-mixed") {
    SharingFamilyOptions options;
    options.num_prox_blocks = 1;
    return sharing_desc(options, seed);
  }
  throw ValidationError("unknown sharing family: " + family);
}

TwoBlockDesc make_two_block_desc(const std::string& family, std::uint64_t seed) {
  if (family == "two-block") return two_block_desc({}, seed);
  throw ValidationError("unknown two-block family: " + family);
}

bool is_consensus_family(const std::string& family) {
  return family == "quadratic" || family == "quadratic-sharp" || family == "sigmoid";
}

bool is_sharing_family(const std::string& family) {
  return family == "sharing-quadratic" || family == "sharing-cos" || family == "sharing-mixed";
}

bool is_two_block_family(const std::string& family) { return family == "two-block"; }

ConsensusInstance realize(const ConsensusDesc& desc) {
  return ConsensusInstance(desc.realize_problem(), desc.f_lower, desc.family);
}

SharingInstance realize(const SharingDesc& desc) {
  return SharingInstance(desc.realize_problem(), desc.f_lower, desc.family);
}

TwoBlockInstance realize(const TwoBlockDesc& desc) {
  return TwoBlockInstance(desc.realize_problem(), desc.f_lower, desc.family);
}

ConsensusInstance make_consensus_instance(const std::string& family, std::uint64_t seed) {
  return realize(make_consensus_desc(family, seed));
}

SharingInstance make_sharing_instance(const std::string& family, std::uint64_t seed) {
  return realize(make_sharing_desc(family, seed));
}

TwoBlockInstance make_two_block_instance(const std::string& family, std::uint64_t seed) {
  return realize(make_two_block_desc(family, seed));
}

double estimate_best_objective(const ConsensusProblem& problem, int starts, std::uint64_t seed) {
  Rng rng(seed);
  const int n = problem.dim();
  double L_sum = 0.0;
  for (const SmoothBlock& block : problem.blocks) L_sum += block.lipschitz;
  const double step = 1.0 / std::max(L_sum, 1e-6);

  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Vector x = problem.set.project(3.0 * rng.normal_vector(n));
    for (int it = 0; it < 500; ++it) {
      Vector grad = Vector::Zero(n);
      for (const SmoothBlock& block : problem.blocks) grad += block.grad(x);
      const Vector next = combined_prox(problem.regularizer, problem.set, x - step * grad, step);
      const double move = (next - x).norm();
      x = next;
      if (move < 1e-12) break;
    }
    best = std::min(best, problem.objective(x));
  }
  return best;
}

}  // namespace ncadmm
