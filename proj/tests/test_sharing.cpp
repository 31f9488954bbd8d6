#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ncadmm/bench.hpp"
#include "ncadmm/diagnostics.hpp"
#include "ncadmm/errors.hpp"
#include "ncadmm/sharing.hpp"
#include "oracles.hpp"

using namespace ncadmm;

namespace {

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

SmoothBlock scalar_quadratic(double q, double b, double lipschitz, bool convex) {
  return quadratic_block(q * Matrix::Identity(1, 1), b * Vector::Ones(1), 0.0, lipschitz,
                         convex);
}

/// One block, identity coupling map, scalar variables throughout.
SharingProblem scalar_sharing(SmoothBlock g, SmoothBlock coupling) {
  std::vector<SharingBlock> blocks;
  blocks.push_back(smooth_sharing_block(std::move(g), Matrix::Identity(1, 1), box_set(1, 10.0)));
  return SharingProblem(blocks, std::move(coupling));
}

}  // namespace

TEST_CASE("initial sharing state") {
  SharingProblem problem =
      scalar_sharing(scalar_quadratic(0.0, 0.0, 0.0, true), scalar_quadratic(1.0, 0.0, 1.0, true));
  const SharingState state = initial_sharing_state(problem);
  CHECK(state.xs[0](0) == doctest::Approx(0.0));
  CHECK(state.x0(0) == doctest::Approx(0.0));
  // y starts at -grad l(x0).
  CHECK(state.y(0) == doctest::Approx(0.0));
  CHECK((state.s - problem.combine(state.xs)).norm() == 0.0);
}

TEST_CASE("sharing block update") {
  SUBCASE("flat block tracks its residual target") {
    SharingProblem problem = scalar_sharing(scalar_quadratic(0.0, 0.0, 0.0, true),
                                            scalar_quadratic(1.0, 0.0, 1.0, true));
    SharingState state = initial_sharing_state(problem);
    state.xs[0] = vec1(0.0);
    state.s = problem.combine(state.xs);
    state.x0 = vec1(2.0);
    state.y = vec1(0.0);
    const PenaltyParams params = penalties_from_rho_sharing(3.0, problem);
    update_sharing_block(problem, state, params, 1);
    CHECK(state.xs[0](0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(state.s(0) == doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("quadratic block balances its curvature against the penalty") {
    SharingProblem problem = scalar_sharing(scalar_quadratic(1.0, 0.0, 1.0, true),
                                            scalar_quadratic(1.0, 0.0, 1.0, true));
    SharingState state = initial_sharing_state(problem);
    state.xs[0] = vec1(0.0);
    state.s = problem.combine(state.xs);
    state.x0 = vec1(2.0);
    state.y = vec1(0.0);
    const PenaltyParams params = penalties_from_rho_sharing(3.0, problem);
    update_sharing_block(problem, state, params, 1);
    CHECK(state.xs[0](0) == doctest::Approx(1.5).epsilon(1e-10));
  }
  SUBCASE("prox blocks use their exact proximal map") {
    std::vector<SharingBlock> blocks;
    blocks.push_back(convex_prox_sharing_block(l1_regularizer(1, 0.8), Matrix::Identity(1, 1),
                                               box_set(1, 10.0)));
    SharingProblem problem(blocks, scalar_quadratic(1.0, 0.0, 1.0, true));
    SharingState state = initial_sharing_state(problem);
    state.xs[0] = vec1(0.0);
    state.s = problem.combine(state.xs);
    state.x0 = vec1(1.4);
    state.y = vec1(0.9);
    const double rho = 3.0;
    const PenaltyParams params = penalties_from_rho_sharing(rho, problem);
    update_sharing_block(problem, state, params, 1);
    // minimize 0.8|x| - y x + rho/2 (x - r)^2 with r = 1.4.
    const double r = 1.4;
    const double closed_form = std::max(r + 0.9 / rho - 0.8 / rho, 0.0);
    CHECK(state.xs[0](0) == doctest::Approx(closed_form).epsilon(1e-10));
    const double brute = oracle::grid_min_1d(
        [&](double x) { return 0.8 * std::abs(x) - 0.9 * x + rho / 2.0 * (x - r) * (x - r); },
        -5.0, 5.0);
    CHECK(state.xs[0](0) == doctest::Approx(brute).epsilon(1e-8));
  }
}

TEST_CASE("sharing pooled-variable update") {
  SUBCASE("quadratic coupling averages toward the pool") {
    SharingProblem problem = scalar_sharing(scalar_quadratic(0.0, 0.0, 0.0, true),
                                            scalar_quadratic(1.0, 0.0, 1.0, true));
    SharingState state = initial_sharing_state(problem);
    state.s = vec1(2.0);
    state.y = vec1(0.0);
    const PenaltyParams params = penalties_from_rho_sharing(1.0, problem);
    update_sharing_x0(problem, state, params);
    CHECK(state.x0(0) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("flat coupling shifts by the scaled dual") {
    SharingProblem problem = scalar_sharing(scalar_quadratic(0.0, 0.0, 0.0, true),
                                            scalar_quadratic(0.0, 0.0, 0.0, true));
    SharingState state = initial_sharing_state(problem);
    state.s = vec1(1.0);
    state.y = vec1(0.6);
    const PenaltyParams params = penalties_from_rho_sharing(2.0, problem);
    update_sharing_x0(problem, state, params);
    CHECK(state.x0(0) == doctest::Approx(1.0 - 0.3).epsilon(1e-10));
  }
  SUBCASE("linear coupling also subtracts its slope") {
    SharingProblem problem = scalar_sharing(scalar_quadratic(0.0, 0.0, 0.0, true),
                                            scalar_quadratic(0.0, 0.5, 0.0, true));
    SharingState state = initial_sharing_state(problem);
    state.s = vec1(1.0);
    state.y = vec1(0.6);
    const PenaltyParams params = penalties_from_rho_sharing(2.0, problem);
    update_sharing_x0(problem, state, params);
    CHECK(state.x0(0) == doctest::Approx(1.0 - (0.6 + 0.5) / 2.0).epsilon(1e-10));
  }
}

TEST_CASE("sharing dual update and its gradient identity") {
  std::vector<SharingBlock> blocks;
  blocks.push_back(smooth_sharing_block(
      quadratic_block(Matrix::Zero(2, 2), Vector::Zero(2), 0.0, 0.0, true),
      Matrix::Identity(2, 2), box_set(2, 10.0)));
  SharingProblem problem(blocks,
                         quadratic_block(Matrix::Identity(2, 2), Vector::Zero(2), 0.0, 1.0,
                                         true));
  SUBCASE("steps by rho times the pooling residual") {
    SharingState state = initial_sharing_state(problem);
    state.x0 = vec2(1.0, -1.0);
    state.s = vec2(0.0, 0.0);
    state.y = vec2(0.0, 0.0);
    const PenaltyParams params = penalties_from_rho_sharing(2.0, problem);
    update_sharing_dual(state, params);
    CHECK(state.y(0) == doctest::Approx(2.0));
    CHECK(state.y(1) == doctest::Approx(-2.0));
  }
  SUBCASE("the pooled update plus the dual step pin grad l(x0) = -y") {
    SharingState state = initial_sharing_state(problem);
    state.s = vec2(1.7, -0.4);
    state.y = vec2(0.3, 0.1);
    const PenaltyParams params = penalties_from_rho_sharing(1.5, problem);
    update_sharing_x0(problem, state, params);
    update_sharing_dual(state, params);
    // grad l = x0 for this coupling.
    CHECK((state.x0 + state.y).norm() <= 1e-10);
  }
}

TEST_CASE("sharing run on a generated instance") {
  SharingFamilyOptions options;
  options.num_blocks = 3;
  options.block_dim = 3;
  options.m = 4;
  const SharingInstance instance = realize(sharing_desc(options, 7));

  SolverConfig config;
  config.params = calibrate_sharing(instance.problem, 1.01);
  config.schedule = full_sweep_schedule(3);
  config.max_iters = 6000;
  config.stop_tol = 1e-12;
  const SharingResult result = run_sharing(instance.problem, config);

  CHECK(result.stop == StopReason::Converged);
  CHECK(result.checks.all_passed());

  const SharingResiduals residuals =
      sharing_stationarity(instance.problem, result.state.xs, result.state.x0, result.state.y);
  CHECK(residuals.feasibility <= 1e-5);
  CHECK(instance.problem.objective(result.state.xs) >= instance.f_lower - 1e-9);

  SUBCASE("the Lagrangian never increases") {
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& row : result.record.rows) {
      CHECK(row.L_value <= previous + 1e-8);
      previous = row.L_value;
    }
  }
  SUBCASE("cyclic block selection also converges") {
    SolverConfig cyclic = config;
    cyclic.schedule = cyclic_schedule(3, 2);
    cyclic.max_iters = 12000;
    const SharingResult other = run_sharing(instance.problem, cyclic);
    CHECK(other.stop == StopReason::Converged);
    CHECK(other.checks.all_passed());
  }
}

TEST_CASE("sharing run with prox blocks and a rippled coupling") {
  SharingFamilyOptions options;
  options.num_blocks = 3;
  options.block_dim = 2;
  options.m = 4;
  options.num_prox_blocks = 1;
  options.nonconvex_coupling = true;
  const SharingInstance instance = realize(sharing_desc(options, 13));

  SolverConfig config;
  config.params = calibrate_sharing(instance.problem, 1.01);
  config.schedule = full_sweep_schedule(3);
  config.max_iters = 8000;
  config.stop_tol = 1e-11;
  const SharingResult result = run_sharing(instance.problem, config);
  CHECK(result.stop == StopReason::Converged);
  CHECK(result.checks.all_passed());
  CHECK(instance.problem.objective(result.state.xs) >= instance.f_lower - 1e-9);
}

TEST_CASE("sharing penalty validation") {
  SharingProblem problem = scalar_sharing(scalar_quadratic(-1.0, 0.0, 1.0, false),
                                          scalar_quadratic(1.0, 0.0, 1.0, true));
  SolverConfig config;
  config.params = penalties_from_rho_sharing(0.5, problem);
  config.schedule = full_sweep_schedule(1);
  CHECK_THROWS_AS(run_sharing(problem, config), CalibrationError);
}

TEST_CASE("initial two-block state") {
  const TwoBlockProblem problem(zero_regularizer(2), box_set(2, 1.0),
                                quadratic_block(Matrix::Identity(2, 2), Vector::Zero(2), 0.0,
                                                1.0, true),
                                Matrix::Identity(2, 2), 2.0 * Matrix::Identity(2, 2),
                                Vector::Constant(2, 2.0));
  const TwoBlockState state = initial_two_block_state(problem);
  CHECK((state.x1 - Vector::Zero(2)).norm() == 0.0);
  CHECK((state.x2 - Vector::Ones(2)).norm() <= 1e-12);
  // y = -A^{-T} grad g(x2) = -(1/2) x2.
  CHECK((state.y + 0.5 * Vector::Ones(2)).norm() <= 1e-12);
}

TEST_CASE("a trivial two-block problem is feasible immediately") {
  const TwoBlockProblem problem(zero_regularizer(2), whole_space(2),
                                quadratic_block(Matrix::Zero(2, 2), Vector::Zero(2), 0.0, 0.0,
                                                true),
                                Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                Vector::Ones(2));
  SolverConfig config;
  config.params = calibrate_two_block(problem, 1.5);
  config.schedule = full_sweep_schedule(2);
  config.max_iters = 200;
  config.stop_tol = 1e-12;
  const TwoBlockResult result = run_two_block(problem, config);
  const TwoBlockResiduals residuals =
      two_block_stationarity(problem, result.state.x1, result.state.x2, result.state.y);
  CHECK(residuals.feasibility <= 1e-8);
  CHECK(result.checks.all_passed());
}

TEST_CASE("two-block descent with a concave smooth part") {
  // A pure concave g has concavity equal to L_g, where the descent condition
  // on s = rho lambda_min(AA') / L_g reads s^2 - s - 2 > 0, that is s > 2.
  // Margin 3 clears the threshold; margin 1.5 sits below it and oscillates.
  const TwoBlockProblem problem(l1_regularizer(2, 0.2), box_set(2, 2.0),
                                quadratic_block(-Matrix::Identity(2, 2), Vector::Zero(2), 0.0,
                                                1.0, false),
                                Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                Vector::Ones(2));
  SolverConfig config;
  config.params = calibrate_two_block(problem, 3.0);
  config.schedule = full_sweep_schedule(2);
  config.max_iters = 3000;
  config.stop_tol = 1e-12;
  CHECK(config.params.rho_scalar() == doctest::Approx(3.0));

  const TwoBlockResult result = run_two_block(problem, config);
  CHECK(result.checks.all_passed());
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& row : result.record.rows) {
    CHECK(row.L_value <= previous + 1e-9);
    previous = row.L_value;
  }
  const TwoBlockResiduals residuals =
      two_block_stationarity(problem, result.state.x1, result.state.x2, result.state.y);
  CHECK(residuals.feasibility <= 1e-6);

  SUBCASE("an under-threshold margin oscillates and the checks record it") {
    SolverConfig weak = config;
    weak.params = calibrate_two_block(problem, 1.5);
    const TwoBlockResult swings = run_two_block(problem, weak);
    CHECK_FALSE(swings.checks.all_passed());
    CHECK(swings.stop == StopReason::MaxIters);
  }
}

TEST_CASE("two-block run on a generated instance") {
  TwoBlockFamilyOptions options;
  options.n1 = 3;
  options.m = 4;
  const TwoBlockInstance instance = realize(two_block_desc(options, 5));
  SolverConfig config;
  config.params = calibrate_two_block(instance.problem, 1.5);
  config.schedule = full_sweep_schedule(2);
  config.max_iters = 5000;
  config.stop_tol = 1e-12;
  const TwoBlockResult result = run_two_block(instance.problem, config);
  CHECK(result.stop == StopReason::Converged);
  CHECK(result.checks.all_passed());

  const double objective = instance.problem.f.value(result.state.x1) +
                           instance.problem.g.value(result.state.x2);
  CHECK(objective >= instance.f_lower - 1e-9);

  SUBCASE("under-calibration is rejected without the override") {
    SolverConfig weak = config;
    weak.params = penalties_from_rho_two_block(0.05 * config.params.rho_scalar(),
                                               instance.problem);
    CHECK_THROWS_AS(run_two_block(instance.problem, weak), CalibrationError);
  }
}
