#include "ncadmm/consensus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "ncadmm/errors.hpp"
#include "ncadmm/inner.hpp"

namespace ncadmm {

namespace {

Vector solve_block_exact(const ConsensusProblem& problem, const ConsensusState& state,
                         const PenaltyParams& params, int k,
                         const Eigen::PartialPivLU<Matrix>* lu, const InnerOptions& inner) {
  const SmoothBlock& block = problem.blocks[k - 1];
  const double rho = params.rho[k - 1];
  const Vector& y = state.ys[k - 1];

  if (block.kind == SmoothBlock::Kind::Quadratic) {
    const Vector rhs = rho * state.x0 - y - block.quad->b;
    if (lu != nullptr) return lu->solve(rhs);
    const Matrix shifted = block.quad->Q + rho * Matrix::Identity(block.dim, block.dim);
    return shifted.partialPivLu().solve(rhs);
  }
  auto grad = [&](const Vector& x) -> Vector { return block.grad(x) + y + rho * (x - state.x0); };
  return minimize_strongly_convex(grad, state.xs[k - 1], 1.0 / (block.lipschitz + rho), inner);
}

Snapshot make_snapshot(const ConsensusState& state) {
  Snapshot snap;
  snap.x0 = state.x0;
  snap.xs = state.xs;
  snap.ys = state.ys;
  return snap;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::ostringstream out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out << "; ";
    out << lines[i];
  }
  return out.str();
}

}  // namespace

ConsensusState initial_consensus_state(const ConsensusProblem& problem) {
  ConsensusState state;
  state.x0 = problem.set.project(Vector::Zero(problem.dim()));
  state.xs.assign(problem.num_blocks(), state.x0);
  state.ys.resize(problem.num_blocks());
  for (int k = 0; k < problem.num_blocks(); ++k) {
    state.ys[k] = -problem.blocks[k].grad(state.xs[k]);
  }
  return state;
}

void update_x0(const ConsensusProblem& problem, ConsensusState& state,
               const PenaltyParams& params, const InnerOptions& inner) {
  const double rho_sum = params.rho_sum();
  Vector v = Vector::Zero(problem.dim());
  for (int k = 0; k < problem.num_blocks(); ++k) {
    v += params.rho[k] * state.xs[k] + state.ys[k];
  }
  v /= rho_sum;
  state.x0 = combined_prox(problem.regularizer, problem.set, v, 1.0 / rho_sum, inner);
}

void update_block_exact(const ConsensusProblem& problem, ConsensusState& state,
                        const PenaltyParams& params, int k, const InnerOptions& inner) {
  state.xs[k - 1] = solve_block_exact(problem, state, params, k, nullptr, inner);
}

void update_block_proximal(const ConsensusProblem& problem, ConsensusState& state,
                           const PenaltyParams& params, int k) {
  const SmoothBlock& block = problem.blocks[k - 1];
  const double denom = params.rho[k - 1] + block.lipschitz;
  state.xs[k - 1] = state.x0 - (block.grad(state.x0) + state.ys[k - 1]) / denom;
}

void update_dual(ConsensusState& state, const PenaltyParams& params, int k) {
  state.ys[k - 1] += params.rho[k - 1] * (state.xs[k - 1] - state.x0);
}

ConsensusResult run_consensus(const ConsensusProblem& problem, const SolverConfig& config) {
  const int K = problem.num_blocks();
  const PenaltyParams& params = config.params;
  const bool proximal = params.mode == PenaltyParams::Mode::Proximal;

  if (params.mode != PenaltyParams::Mode::Consensus && !proximal) {
    throw ValidationError("run_consensus needs penalties in consensus or proximal mode");
  }
  if (static_cast<int>(params.rho.size()) != K) {
    throw DimensionError("penalty count does not match the block count");
  }
  if (config.schedule.num_blocks != K) {
    throw DimensionError("schedule block count does not match the problem");
  }
  if (K + 1 > 63) {
    throw ValidationError("the trace fired_mask supports at most 62 blocks");
  }
  if (proximal) {
    if (config.schedule.kind == Schedule::Kind::Randomized) {
      throw ValidationError("proximal mode needs a deterministic schedule");
    }
    if (config.schedule.include_x0) {
      throw ValidationError(
          "proximal schedules cover blocks only; build them with include_x0 = false");
    }
  }

  std::vector<double> lipschitz(K);
  std::vector<bool> is_convex(K);
  for (int k = 0; k < K; ++k) {
    lipschitz[k] = problem.blocks[k].lipschitz;
    is_convex[k] = problem.blocks[k].is_convex;
  }
  std::vector<std::string> violations = calibration_violations(params, lipschitz, is_convex);
  if (proximal) {
    const int needed = config.schedule.kind == Schedule::Kind::Cyclic ? config.schedule.period : 1;
    if (params.period < needed) {
      violations.push_back("penalty period is smaller than the schedule period");
    }
  }
  if (!violations.empty() && !params.override_flag) {
    throw CalibrationError("penalties fail calibration: " + join_lines(violations));
  }

  ConsensusResult result;
  result.record.algorithm =
      proximal ? AlgorithmKind::ConsensusProximal : AlgorithmKind::ConsensusExact;
  result.record.override_flag = params.override_flag;
  result.record.inner_tol = config.inner.tol;
  result.record.has_snapshots = config.record_snapshots;

  ConsensusState state = initial_consensus_state(problem);
  if (config.record_snapshots) result.record.snapshots.push_back(make_snapshot(state));

  std::vector<std::unique_ptr<Eigen::PartialPivLU<Matrix>>> lus(K);
  if (!proximal) {
    for (int k = 0; k < K; ++k) {
      if (problem.blocks[k].kind == SmoothBlock::Kind::Quadratic) {
        const Matrix shifted =
            problem.blocks[k].quad->Q + params.rho[k] * Matrix::Identity(problem.dim(), problem.dim());
        lus[k] = std::make_unique<Eigen::PartialPivLU<Matrix>>(shifted);
      }
    }
  }

  Rng rng(config.schedule.seed);
  const double tolc = check_tolerance(config.inner);
  const bool checking = config.check_level != CheckLevel::Off;
  const bool strict = config.check_level == CheckLevel::Full;
  auto record_check = [&](const char* name, double excess, long iter) {
    result.checks.item(name).count(excess, iter);
    if (strict && !(excess <= 0.0)) {
      std::ostringstream msg;
      msg << name << " check failed at iteration " << iter << " by " << excess;
      throw CheckViolationError(msg.str(), iter, name);
    }
  };

  double L_prev =
      consensus_lagrangian(problem, state.x0, state.xs, state.ys, params.rho);
  const double L_init = L_prev;
  const double beta_total =
      proximal ? std::accumulate(params.beta.begin(), params.beta.end(), 0.0) : 0.0;
  double spent = 0.0;
  std::vector<Vector> x0_at_fire(K, state.x0);

  result.final_progress =
      consensus_progress(problem, state.x0, state.xs, state.ys, params.rho, config.inner);
  if (result.final_progress <= config.stop_tol) {
    result.stop = StopReason::Converged;
    result.state = state;
    return result;
  }

  for (long t = 1; t <= config.max_iters; ++t) {
    const auto start_time = std::chrono::steady_clock::now();
    std::vector<int> fired = next_blocks(config.schedule, t - 1, rng);
    std::sort(fired.begin(), fired.end());

    const Vector x0_prev = state.x0;
    const std::vector<Vector> xs_prev = state.xs;
    const std::vector<Vector> ys_prev = state.ys;

    std::uint64_t mask = 0;
    for (int idx : fired) mask |= std::uint64_t{1} << idx;

    if (proximal) {
      mask |= 1;
      update_x0(problem, state, params, config.inner);
      for (int idx : fired) {
        update_block_proximal(problem, state, params, idx);
        update_dual(state, params, idx);
      }
    } else {
      if (mask & 1) update_x0(problem, state, params, config.inner);
      for (int idx : fired) {
        if (idx == 0) continue;
        state.xs[idx - 1] =
            solve_block_exact(problem, state, params, idx, lus[idx - 1].get(), config.inner);
        update_dual(state, params, idx);
      }
    }
    state.t = t;

    const double L_new =
        consensus_lagrangian(problem, state.x0, state.xs, state.ys, params.rho);
    const double P =
        consensus_progress(problem, state.x0, state.xs, state.ys, params.rho, config.inner);

    TraceRow row;
    row.iter = t;
    row.L_value = L_new;
    row.P_value = P;
    row.fired_mask = mask;
    row.x0_step_sq = (state.x0 - x0_prev).squaredNorm();
    for (int k = 0; k < K; ++k) {
      row.feas_gap = std::max(row.feas_gap, (state.xs[k] - state.x0).norm());
      row.block_step_sq += (state.xs[k] - xs_prev[k]).squaredNorm();
      row.dual_step_sq += (state.ys[k] - ys_prev[k]).squaredNorm();
    }

    if (proximal) {
      for (int k = 0; k < K; ++k) {
        spent += params.alpha[k] * (state.xs[k] - xs_prev[k]).squaredNorm();
      }
      spent += beta_total * row.x0_step_sq;
      row.descent_margin = (L_init - spent) - L_new;
    } else {
      double rhs = -0.5 * params.gamma0 * row.x0_step_sq;
      for (int k = 0; k < K; ++k) {
        if (!((mask >> (k + 1)) & 1u)) continue;
        const double L = lipschitz[k];
        rhs += (L * L / params.rho[k] - 0.5 * params.gamma[k]) *
               (state.xs[k] - xs_prev[k]).squaredNorm();
      }
      row.descent_margin = rhs - (L_new - L_prev);
    }

    if (checking) {
      record_check("descent", -row.descent_margin - tolc, t);
      record_check("lower_bound", problem.objective(state.x0) - L_new - tolc, t);
      for (int k = 0; k < K; ++k) {
        if (!((mask >> (k + 1)) & 1u)) continue;
        const double dy = (state.ys[k] - ys_prev[k]).norm();
        const double dx = (state.xs[k] - xs_prev[k]).norm();
        if (proximal) {
          const double drift2 = (state.x0 - x0_at_fire[k]).squaredNorm();
          const double bound2 =
              2.0 * lipschitz[k] * lipschitz[k] * (4.0 * drift2 + dx * dx);
          record_check("dual_bound", dy - std::sqrt(bound2) - tolc, t);
          const Vector identity = problem.blocks[k].grad(state.x0) +
                                  lipschitz[k] * (state.xs[k] - state.x0) + state.ys[k];
          record_check("prox_identity",
                       identity.norm() - 1e-12 * (1.0 + state.ys[k].norm()), t);
        } else {
          record_check("dual_bound", dy - lipschitz[k] * dx - tolc, t);
          const double res = (problem.blocks[k].grad(state.xs[k]) + state.ys[k]).norm();
          record_check("grad_dual_identity", res - tolc * (1.0 + state.xs[k].norm()), t);
        }
      }
    }
    if (proximal) {
      for (int k = 0; k < K; ++k) {
        if ((mask >> (k + 1)) & 1u) x0_at_fire[k] = state.x0;
      }
    }

    if (config.timing) {
      const auto elapsed = std::chrono::steady_clock::now() - start_time;
      row.wall_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    result.record.rows.push_back(row);
    if (config.record_snapshots) result.record.snapshots.push_back(make_snapshot(state));

    L_prev = L_new;
    result.final_progress = P;
    if (P <= config.stop_tol) {
      result.stop = StopReason::Converged;
      break;
    }
  }

  result.iterations = static_cast<long>(result.record.rows.size());
  result.state = std::move(state);
  return result;
}

}  // namespace ncadmm
