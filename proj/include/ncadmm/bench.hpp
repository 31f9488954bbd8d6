#pragma once

#include <cstdint>
#include <string>

#include "ncadmm/instance_io.hpp"
#include "ncadmm/problem.hpp"
#include "ncadmm/rng.hpp"

namespace ncadmm {

/// A generated instance, realized and ready to solve. f_lower is a certified
/// analytic lower bound on the objective over the feasible set; nothing here
/// is estimated.
struct ConsensusInstance {
  ConsensusProblem problem;
  double f_lower;
  std::string family;

  ConsensusInstance(ConsensusProblem problem, double f_lower, std::string family)
      : problem(std::move(problem)), f_lower(f_lower), family(std::move(family)) {}
};

struct SharingInstance {
  SharingProblem problem;
  double f_lower;
  std::string family;

  SharingInstance(SharingProblem problem, double f_lower, std::string family)
      : problem(std::move(problem)), f_lower(f_lower), family(std::move(family)) {}
};

struct TwoBlockInstance {
  TwoBlockProblem problem;
  double f_lower;
  std::string family;

  TwoBlockInstance(TwoBlockProblem problem, double f_lower, std::string family)
      : problem(std::move(problem)), f_lower(f_lower), family(std::move(family)) {}
};

/// Random nonconvex quadratics sharing one variable: each Q_k has eigenvalues
/// drawn from [-nonconvexity, 1] under a random orthogonal basis, plus an
/// optional l1 term, over a compact box. The sharp variant pins one
/// eigenvalue at each end of the range exactly.
struct QuadraticFamilyOptions {
  int num_blocks = 5;
  int dim = 10;
  double nonconvexity = 1.0;  ///< eigenvalue range is [-nonconvexity, 1]
  double l1_weight = 0.1;     ///< h = l1_weight * ||x||_1; 0 for none
  double box_radius = 5.0;    ///< X = [-box_radius, box_radius]^dim, must be positive
  bool sharp = false;
};
ConsensusDesc quadratic_consensus_desc(const QuadraticFamilyOptions& options,
                                       std::uint64_t seed);

/// Sums of logistic terms g_k(x) = sum_i s(a_i'x - b_i) over a box; smooth,
/// bounded below by zero, nonconvex. The gradient Lipschitz constant is the
/// analytic bound sum_i ||a_i||^2 / (6 sqrt(3)).
struct SigmoidFamilyOptions {
  int num_blocks = 4;
  int dim = 8;
  int terms = 12;  ///< logistic terms per block
  double box_radius = 3.0;
};
ConsensusDesc sigmoid_consensus_desc(const SigmoidFamilyOptions& options, std::uint64_t seed);

/// Sharing instances: nonconvex quadratic blocks over boxes (optionally some
/// convex l1 prox blocks), full-column-rank Gaussian couplings A_k, and a
/// quadratic tracking loss on the pooled variable, optionally made nonconvex
/// by a cosine ripple.
struct SharingFamilyOptions {
  int num_blocks = 4;
  int block_dim = 4;  ///< must not exceed m (A_k needs full column rank)
  int m = 6;
  double nonconvexity = 1.0;
  double box_radius = 4.0;
  int num_prox_blocks = 0;        ///< trailing blocks become l1 prox blocks
  double l1_weight = 0.2;         ///< weight of the prox blocks
  bool nonconvex_coupling = false;
  double ripple = 0.5;  ///< mu of the cosine ripple when nonconvex_coupling
};
SharingDesc sharing_desc(const SharingFamilyOptions& options, std::uint64_t seed);

/// Two-block instances: f = l1 over a box, g quadratic (nonconvex unless
/// nonconvexity <= 0) with its top eigenvalue pinned at 1, A = orthogonal
/// times diag with singular values in [0.5, 1.5], B Gaussian with smallest
/// singular value at least 0.3.
struct TwoBlockFamilyOptions {
  int n1 = 4;  ///< must not exceed m (B needs full column rank)
  int m = 6;
  double l1_weight = 0.3;
  double box_radius = 2.0;
  /// g eigenvalue range is [-nonconvexity, 1] with the top pinned at 1.
  /// Values below 1/6 keep the 1.5-margin penalty rule descent-certified.
  double nonconvexity = 0.1;
};
TwoBlockDesc two_block_desc(const TwoBlockFamilyOptions& options, std::uint64_t seed);

/// Description by family name with that family's default shape:
/// "quadratic", "quadratic-sharp", "sigmoid" (consensus);
/// "sharing-quadratic", "sharing-cos", "sharing-mixed" (sharing);
/// "two-block". Throws ValidationError for unknown names.
ConsensusDesc make_consensus_desc(const std::string& family, std::uint64_t seed);
SharingDesc make_sharing_desc(const std::string& family, std::uint64_t seed);
TwoBlockDesc make_two_block_desc(const std::string& family, std::uint64_t seed);

/// True when the family name belongs to the given problem class.
bool is_consensus_family(const std::string& family);
bool is_sharing_family(const std::string& family);
bool is_two_block_family(const std::string& family);

/// Realized forms of the same generators.
ConsensusInstance realize(const ConsensusDesc& desc);
SharingInstance realize(const SharingDesc& desc);
TwoBlockInstance realize(const TwoBlockDesc& desc);
ConsensusInstance make_consensus_instance(const std::string& family, std::uint64_t seed);
SharingInstance make_sharing_instance(const std::string& family, std::uint64_t seed);
TwoBlockInstance make_two_block_instance(const std::string& family, std::uint64_t seed);

/// Certified lower bound of 0.5 x'Qx + b'x + c + l1_weight ||x||_1 over the
/// box [-radius, radius]^n: the better of an eigenvalue bound and a
/// coordinatewise bound, both exact arithmetic over the box.
double quadratic_box_lower_bound(const Matrix& Q, const Vector& b, double c, double l1_weight,
                                 double radius);

/// Best objective found by multi-start projected prox-gradient descent on the
/// summed objective. An estimate of the best local value, not a bound.
double estimate_best_objective(const ConsensusProblem& problem, int starts, std::uint64_t seed);

/// Random orthogonal matrix (QR of a Gaussian draw, sign-canonicalized so the
/// result is a deterministic function of the rng state).
Matrix random_orthogonal(int n, Rng& rng);

}  // namespace ncadmm
