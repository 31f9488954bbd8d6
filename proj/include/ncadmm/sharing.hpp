#pragma once

#include <vector>

#include "ncadmm/diagnostics.hpp"
#include "ncadmm/problem.hpp"
#include "ncadmm/solver_options.hpp"
#include "ncadmm/trace.hpp"

namespace ncadmm {

/// Iterate of a sharing run. s caches sum_k A_k x_k; the run loop maintains
/// it incrementally and recomputes it periodically.
struct SharingState {
  std::vector<Vector> xs;
  Vector x0;
  Vector y;
  Vector s;
  long t = 0;
};

/// x_k = proj_{X_k}(0), x0 = sum_k A_k x_k, y = -grad l(x0).
SharingState initial_sharing_state(const SharingProblem& problem);

/// Block update (1-based k) against the current cache: minimizes
/// g_k(x) - <A_k'y, x> + rho/2 ||A_k x - r_k||^2 over X_k with
/// r_k = x0 - s + A_k x_k, then refreshes s.
void update_sharing_block(const SharingProblem& problem, SharingState& state,
                          const PenaltyParams& params, int k, const InnerOptions& inner = {});

/// Shared-variable update: minimizes l(x0) + <y, x0> + rho/2 ||x0 - s||^2.
void update_sharing_x0(const SharingProblem& problem, SharingState& state,
                       const PenaltyParams& params, const InnerOptions& inner = {});

/// y += rho (x0 - s). Runs only together with update_sharing_x0, which keeps
/// grad l(x0) = -y an invariant of the iteration.
void update_sharing_dual(SharingState& state, const PenaltyParams& params);

struct SharingResult {
  StopReason stop = StopReason::MaxIters;
  long iterations = 0;
  double final_progress = 0.0;
  SharingState state;
  RunRecord record;
  CheckReport checks;
};

/// Gauss-Seidel sharing ADMM: fired blocks in ascending order, then the
/// shared variable and the dual together whenever index 0 fires. Calibration
/// is enforced unless params.override_flag is set.
SharingResult run_sharing(const SharingProblem& problem, const SolverConfig& config);

struct TwoBlockState {
  Vector x1;
  Vector x2;
  Vector y;
  long t = 0;
};

/// x1 = proj_X(0), x2 = A^{-1}(c - B x1), y = -A^{-T} grad g(x2).
TwoBlockState initial_two_block_state(const TwoBlockProblem& problem);

struct TwoBlockResult {
  StopReason stop = StopReason::MaxIters;
  long iterations = 0;
  double final_progress = 0.0;
  TwoBlockState state;
  RunRecord record;
  CheckReport checks;
};

/// Two-block ADMM on f(x1) + g(x2) s.t. B x1 + A x2 = c: accelerated
/// prox-gradient for the x1 subproblem, a direct solve (or gradient descent)
/// for x2, then the dual step. Every iteration updates everything; the
/// configured schedule is ignored.
TwoBlockResult run_two_block(const TwoBlockProblem& problem, const SolverConfig& config);

}  // namespace ncadmm
