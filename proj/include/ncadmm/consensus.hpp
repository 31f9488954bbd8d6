#pragma once

#include <vector>

#include "ncadmm/diagnostics.hpp"
#include "ncadmm/problem.hpp"
#include "ncadmm/solver_options.hpp"
#include "ncadmm/trace.hpp"

namespace ncadmm {

/// Iterate of a consensus run: the shared variable, the K block copies, and
/// the K duals.
struct ConsensusState {
  Vector x0;
  std::vector<Vector> xs;
  std::vector<Vector> ys;
  long t = 0;  ///< completed iterations
};

/// x0 = proj_X(0), every copy equal to x0, y_k = -grad g_k(x_k).
ConsensusState initial_consensus_state(const ConsensusProblem& problem);

/// Shared-variable update: the prox of (h + indicator of X) with weight
/// 1 / sum rho_k at the penalty-weighted average of the copies and duals.
void update_x0(const ConsensusProblem& problem, ConsensusState& state,
               const PenaltyParams& params, const InnerOptions& inner = {});

/// Exact block update (k is 1-based, matching schedule indices): quadratic
/// blocks solve (Q + rho I) x = rho x0 - y - b directly, custom blocks run
/// gradient descent warm-started at the current copy.
void update_block_exact(const ConsensusProblem& problem, ConsensusState& state,
                        const PenaltyParams& params, int k, const InnerOptions& inner = {});

/// Linearized block update: x_k = x0 - (grad g_k(x0) + y_k) / (rho_k + L_k).
void update_block_proximal(const ConsensusProblem& problem, ConsensusState& state,
                           const PenaltyParams& params, int k);

/// y_k += rho_k (x_k - x0).
void update_dual(ConsensusState& state, const PenaltyParams& params, int k);

struct ConsensusResult {
  StopReason stop = StopReason::MaxIters;
  long iterations = 0;
  double final_progress = 0.0;  ///< P at exit
  ConsensusState state;
  RunRecord record;
  CheckReport checks;  ///< online tallies; empty when check_level is Off
};

/// Runs consensus ADMM (exact or proximal block updates, chosen by
/// params.mode) under the configured schedule. The shared variable updates
/// first within an iteration, then the fired blocks in ascending order, each
/// followed by its dual step. Penalties are validated against the calibration
/// conditions unless params.override_flag is set; the override is recorded in
/// the trace. Throws CheckViolationError on a failed check at level Full.
ConsensusResult run_consensus(const ConsensusProblem& problem, const SolverConfig& config);

}  // namespace ncadmm
