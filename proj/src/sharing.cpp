#include "ncadmm/sharing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "ncadmm/errors.hpp"
#include "ncadmm/inner.hpp"
#include "ncadmm/linalg.hpp"

namespace ncadmm {

namespace {

Vector solve_sharing_block(const SharingProblem& problem, const SharingState& state,
                           double rho, int k, const Eigen::PartialPivLU<Matrix>* lu,
                           double a_norm_sq, const InnerOptions& inner) {
  const SharingBlock& block = problem.blocks[k - 1];
  const Matrix& A = block.A;
  const Vector r = state.x0 - state.s + A * state.xs[k - 1];
  const Vector pull = A.transpose() * state.y;

  if (block.kind == SharingBlock::Kind::ConvexProx) {
    auto smooth_grad = [&](const Vector& x) -> Vector {
      return rho * (A.transpose() * (A * x - r)) - pull;
    };
    return minimize_proximal(smooth_grad, block.g_prox, block.set, state.xs[k - 1],
                             1.0 / (rho * a_norm_sq), inner);
  }
  if (block.g.kind == SmoothBlock::Kind::Quadratic &&
      block.set.kind == FeasibleSet::Kind::WholeSpace) {
    const Vector rhs = pull + rho * (A.transpose() * r) - block.g.quad->b;
    if (lu != nullptr) return lu->solve(rhs);
    const Matrix shifted = block.g.quad->Q + rho * (A.transpose() * A);
    return shifted.partialPivLu().solve(rhs);
  }
  auto grad = [&](const Vector& x) -> Vector {
    return block.g.grad(x) - pull + rho * (A.transpose() * (A * x - r));
  };
  return minimize_projected(grad, block.set, state.xs[k - 1],
                            1.0 / (block.g.lipschitz + rho * a_norm_sq), inner);
}

Vector solve_sharing_x0(const SharingProblem& problem, const SharingState& state, double rho,
                        const Eigen::PartialPivLU<Matrix>* lu, const InnerOptions& inner) {
  const SmoothBlock& l = problem.coupling;
  if (l.kind == SmoothBlock::Kind::Quadratic) {
    const Vector rhs = rho * state.s - state.y - l.quad->b;
    if (lu != nullptr) return lu->solve(rhs);
    const Matrix shifted = l.quad->Q + rho * Matrix::Identity(l.dim, l.dim);
    return shifted.partialPivLu().solve(rhs);
  }
  auto grad = [&](const Vector& x) -> Vector {
    return l.grad(x) + state.y + rho * (x - state.s);
  };
  return minimize_strongly_convex(grad, state.x0, 1.0 / (l.lipschitz + rho), inner);
}

double block_gain_sq(const Matrix& A) {
  const double s = largest_singular_value(A);
  return s * s;
}

Snapshot sharing_snapshot(const SharingState& state) {
  Snapshot snap;
  snap.x0 = state.x0;
  snap.xs = state.xs;
  snap.ys = {state.y};
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

SharingState initial_sharing_state(const SharingProblem& problem) {
  SharingState state;
  state.xs.resize(problem.num_blocks());
  for (int k = 0; k < problem.num_blocks(); ++k) {
    state.xs[k] = problem.blocks[k].set.project(Vector::Zero(problem.blocks[k].dim()));
  }
  state.s = problem.combine(state.xs);
  state.x0 = state.s;
  state.y = -problem.coupling.grad(state.x0);
  return state;
}

void update_sharing_block(const SharingProblem& problem, SharingState& state,
                          const PenaltyParams& params, int k, const InnerOptions& inner) {
  const SharingBlock& block = problem.blocks[k - 1];
  const Vector previous = state.xs[k - 1];
  state.xs[k - 1] = solve_sharing_block(problem, state, params.rho_scalar(), k, nullptr,
                                        block_gain_sq(block.A), inner);
  state.s += block.A * (state.xs[k - 1] - previous);
}

void update_sharing_x0(const SharingProblem& problem, SharingState& state,
                       const PenaltyParams& params, const InnerOptions& inner) {
  state.x0 = solve_sharing_x0(problem, state, params.rho_scalar(), nullptr, inner);
}

void update_sharing_dual(SharingState& state, const PenaltyParams& params) {
  state.y += params.rho_scalar() * (state.x0 - state.s);
}

SharingResult run_sharing(const SharingProblem& problem, const SolverConfig& config) {
  const int K = problem.num_blocks();
  const PenaltyParams& params = config.params;

  if (params.mode != PenaltyParams::Mode::Sharing) {
    throw ValidationError("run_sharing needs penalties in sharing mode");
  }
  if (config.schedule.num_blocks != K) {
    throw DimensionError("schedule block count does not match the problem");
  }
  if (K + 1 > 63) {
    throw ValidationError("the trace fired_mask supports at most 62 blocks");
  }
  std::vector<std::string> violations = calibration_violations(params, problem);
  if (!violations.empty() && !params.override_flag) {
    throw CalibrationError("penalties fail calibration: " + join_lines(violations));
  }

  const double rho = params.rho_scalar();
  const double L = problem.coupling.lipschitz;

  SharingResult result;
  result.record.algorithm = AlgorithmKind::Sharing;
  result.record.override_flag = params.override_flag;
  result.record.inner_tol = config.inner.tol;
  result.record.has_snapshots = config.record_snapshots;

  SharingState state = initial_sharing_state(problem);
  if (config.record_snapshots) result.record.snapshots.push_back(sharing_snapshot(state));

  std::vector<std::unique_ptr<Eigen::PartialPivLU<Matrix>>> lus(K);
  std::vector<double> gains(K, 0.0);
  for (int k = 0; k < K; ++k) {
    const SharingBlock& block = problem.blocks[k];
    if (block.kind == SharingBlock::Kind::Smooth &&
        block.g.kind == SmoothBlock::Kind::Quadratic &&
        block.set.kind == FeasibleSet::Kind::WholeSpace) {
      const Matrix shifted = block.g.quad->Q + rho * (block.A.transpose() * block.A);
      lus[k] = std::make_unique<Eigen::PartialPivLU<Matrix>>(shifted);
    } else {
      gains[k] = block_gain_sq(block.A);
    }
  }
  std::unique_ptr<Eigen::PartialPivLU<Matrix>> x0_lu;
  if (problem.coupling.kind == SmoothBlock::Kind::Quadratic) {
    const Matrix shifted =
        problem.coupling.quad->Q + rho * Matrix::Identity(problem.m(), problem.m());
    x0_lu = std::make_unique<Eigen::PartialPivLU<Matrix>>(shifted);
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

  double L_prev = sharing_lagrangian(problem, state.xs, state.x0, state.y, rho);

  result.final_progress = sharing_progress(problem, state.xs, state.x0, state.y, config.inner);
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
    const Vector y_prev = state.y;
    const std::vector<Vector> xs_prev = state.xs;

    std::uint64_t mask = 0;
    for (int idx : fired) mask |= std::uint64_t{1} << idx;

    for (int idx : fired) {
      if (idx == 0) continue;
      const Vector previous = state.xs[idx - 1];
      state.xs[idx - 1] = solve_sharing_block(problem, state, rho, idx, lus[idx - 1].get(),
                                              gains[idx - 1], config.inner);
      state.s += problem.blocks[idx - 1].A * (state.xs[idx - 1] - previous);
    }
    if (t % 100 == 0) state.s = problem.combine(state.xs);
    if (mask & 1) {
      state.x0 = solve_sharing_x0(problem, state, rho, x0_lu.get(), config.inner);
      state.y += rho * (state.x0 - state.s);
    }
    state.t = t;

    const double L_new = sharing_lagrangian(problem, state.xs, state.x0, state.y, rho);
    const double P = sharing_progress(problem, state.xs, state.x0, state.y, config.inner);

    TraceRow row;
    row.iter = t;
    row.L_value = L_new;
    row.P_value = P;
    row.fired_mask = mask;
    row.feas_gap = (state.s - state.x0).norm();
    row.x0_step_sq = (state.x0 - x0_prev).squaredNorm();
    row.dual_step_sq = (state.y - y_prev).squaredNorm();
    for (int k = 0; k < K; ++k) {
      row.block_step_sq += (state.xs[k] - xs_prev[k]).squaredNorm();
    }

    double rhs = 0.0;
    for (int k = 0; k < K; ++k) {
      if (!((mask >> (k + 1)) & 1u)) continue;
      rhs -= 0.5 * params.gamma[k] * (state.xs[k] - xs_prev[k]).squaredNorm();
    }
    if (mask & 1) {
      rhs -= (0.5 * params.gamma0 - L * L / rho) * row.x0_step_sq;
    }
    row.descent_margin = rhs - (L_new - L_prev);

    if (checking) {
      record_check("descent", -row.descent_margin - tolc, t);
      double floor = problem.coupling.value(state.s) +
                     0.5 * (rho - L) * (state.x0 - state.s).squaredNorm();
      for (int k = 0; k < K; ++k) floor += problem.blocks[k].g_value(state.xs[k]);
      record_check("lower_bound", floor - L_new - tolc, t);
      if (mask & 1) {
        const double dy = (state.y - y_prev).norm();
        record_check("dual_bound", dy - L * (state.x0 - x0_prev).norm() - tolc, t);
        const double res = (problem.coupling.grad(state.x0) + state.y).norm();
        record_check("coupling_identity", res - tolc * (1.0 + state.x0.norm()), t);
      }
    }

    if (config.timing) {
      const auto elapsed = std::chrono::steady_clock::now() - start_time;
      row.wall_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    result.record.rows.push_back(row);
    if (config.record_snapshots) result.record.snapshots.push_back(sharing_snapshot(state));

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

TwoBlockState initial_two_block_state(const TwoBlockProblem& problem) {
  TwoBlockState state;
  state.x1 = problem.set.project(Vector::Zero(problem.n1()));
  const Eigen::PartialPivLU<Matrix> lu(problem.A);
  state.x2 = lu.solve(problem.c - problem.B * state.x1);
  state.y = problem.A.transpose().partialPivLu().solve(-problem.g.grad(state.x2));
  return state;
}

TwoBlockResult run_two_block(const TwoBlockProblem& problem, const SolverConfig& config) {
  const PenaltyParams& params = config.params;
  if (params.mode != PenaltyParams::Mode::TwoBlock) {
    throw ValidationError("run_two_block needs penalties in two-block mode");
  }
  std::vector<std::string> violations = calibration_violations(params, problem);
  if (!violations.empty() && !params.override_flag) {
    throw CalibrationError("penalties fail calibration: " + join_lines(violations));
  }

  const double rho = params.rho_scalar();
  const Matrix Bt = problem.B.transpose();
  const Matrix At = problem.A.transpose();
  const double b_gain = largest_singular_value(problem.B);
  const double a_gain = largest_singular_value(problem.A);
  const double x1_step = 1.0 / std::max(rho * b_gain * b_gain, 1e-12);
  const double dual_gain = problem.g.lipschitz / std::sqrt(problem.lambda_min_AAt);

  TwoBlockResult result;
  result.record.algorithm = AlgorithmKind::TwoBlock;
  result.record.override_flag = params.override_flag;
  result.record.inner_tol = config.inner.tol;
  result.record.has_snapshots = config.record_snapshots;

  TwoBlockState state = initial_two_block_state(problem);
  auto snapshot = [&]() {
    Snapshot snap;
    snap.xs = {state.x1, state.x2};
    snap.ys = {state.y};
    return snap;
  };
  if (config.record_snapshots) result.record.snapshots.push_back(snapshot());

  std::unique_ptr<Eigen::PartialPivLU<Matrix>> x2_lu;
  if (problem.g.kind == SmoothBlock::Kind::Quadratic) {
    const Matrix shifted = problem.g.quad->Q + rho * (At * problem.A);
    x2_lu = std::make_unique<Eigen::PartialPivLU<Matrix>>(shifted);
  }

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

  double L_prev = two_block_lagrangian(problem, state.x1, state.x2, state.y, rho);

  result.final_progress =
      two_block_progress(problem, state.x1, state.x2, state.y, config.inner);
  if (result.final_progress <= config.stop_tol) {
    result.stop = StopReason::Converged;
    result.state = state;
    return result;
  }

  for (long t = 1; t <= config.max_iters; ++t) {
    const auto start_time = std::chrono::steady_clock::now();
    const Vector x1_prev = state.x1;
    const Vector x2_prev = state.x2;
    const Vector y_prev = state.y;

    const Vector d = problem.A * state.x2 - problem.c;
    const Vector pull = Bt * state.y;
    auto x1_grad = [&](const Vector& x) -> Vector {
      return pull + rho * (Bt * (problem.B * x + d));
    };
    state.x1 =
        minimize_fista(x1_grad, problem.f, problem.set, state.x1, x1_step, config.inner);

    const Vector shift = problem.B * state.x1 - problem.c;
    if (problem.g.kind == SmoothBlock::Kind::Quadratic) {
      const Vector rhs_vec = -problem.g.quad->b - At * state.y - rho * (At * shift);
      state.x2 = x2_lu->solve(rhs_vec);
    } else {
      auto x2_grad = [&](const Vector& x) -> Vector {
        return problem.g.grad(x) + At * state.y + rho * (At * (problem.A * x + shift));
      };
      state.x2 = minimize_strongly_convex(
          x2_grad, state.x2, 1.0 / (problem.g.lipschitz + rho * a_gain * a_gain),
          config.inner);
    }
    const Vector gap = problem.B * state.x1 + problem.A * state.x2 - problem.c;
    state.y += rho * gap;
    state.t = t;

    const double L_new = two_block_lagrangian(problem, state.x1, state.x2, state.y, rho);
    const double P = two_block_progress(problem, state.x1, state.x2, state.y, config.inner);

    TraceRow row;
    row.iter = t;
    row.L_value = L_new;
    row.P_value = P;
    row.fired_mask = 0b111;
    row.feas_gap = gap.norm();
    row.block_step_sq =
        (state.x1 - x1_prev).squaredNorm() + (state.x2 - x2_prev).squaredNorm();
    row.dual_step_sq = (state.y - y_prev).squaredNorm();
    row.descent_margin = L_prev - L_new;

    if (checking) {
      record_check("descent", -row.descent_margin - tolc, t);
      const double dy = (state.y - y_prev).norm();
      record_check("dual_bound", dy - dual_gain * (state.x2 - x2_prev).norm() - tolc, t);
      const double res = (problem.g.grad(state.x2) + At * state.y).norm();
      record_check("x2_identity", res - tolc * (1.0 + state.x2.norm()), t);
    }

    if (config.timing) {
      const auto elapsed = std::chrono::steady_clock::now() - start_time;
      row.wall_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    result.record.rows.push_back(row);
    if (config.record_snapshots) result.record.snapshots.push_back(snapshot());

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
