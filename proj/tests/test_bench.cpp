#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ncadmm/bench.hpp"
#include "ncadmm/diagnostics.hpp"
#include "ncadmm/errors.hpp"
#include "ncadmm/linalg.hpp"
#include "ncadmm/validate.hpp"
#include "oracles.hpp"

using namespace ncadmm;

namespace {

/// Draws a uniformly random point of the set (box assumed, as the generators
/// only emit boxes).
Vector random_feasible(const FeasibleSet& set, Rng& rng) {
  Vector x(set.dim);
  for (int i = 0; i < set.dim; ++i) x(i) = rng.uniform(set.lo(i), set.hi(i));
  return x;
}

}  // namespace

TEST_CASE("generators are deterministic in the seed") {
  QuadraticFamilyOptions options;
  options.num_blocks = 2;
  options.dim = 4;
  const ConsensusDesc a = quadratic_consensus_desc(options, 77);
  const ConsensusDesc b = quadratic_consensus_desc(options, 77);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t k = 0; k < a.blocks.size(); ++k) {
    CHECK(a.blocks[k].Q == b.blocks[k].Q);
    CHECK(a.blocks[k].b == b.blocks[k].b);
    CHECK(a.blocks[k].lipschitz == b.blocks[k].lipschitz);
  }
  CHECK(a.f_lower == b.f_lower);

  const ConsensusDesc c = quadratic_consensus_desc(options, 78);
  CHECK(a.blocks[0].Q != c.blocks[0].Q);
}

TEST_CASE("quadratic box lower bound") {
  SUBCASE("negative identity over the unit box") {
    const int n = 4;
    const double bound =
        quadratic_box_lower_bound(-Matrix::Identity(n, n), Vector::Zero(n), 0.0, 0.0, 1.0);
    CHECK(bound == doctest::Approx(-0.5 * n).epsilon(1e-12));
  }
  SUBCASE("a convex quadratic with no linear term bottoms out at zero") {
    const double bound =
        quadratic_box_lower_bound(Matrix::Identity(3, 3), Vector::Zero(3), 0.0, 0.0, 2.0);
    CHECK(bound == doctest::Approx(0.0));
  }
  SUBCASE("the constant term shifts the bound") {
    const double bound =
        quadratic_box_lower_bound(Matrix::Zero(2, 2), Vector::Zero(2), 3.5, 0.0, 1.0);
    CHECK(bound == doctest::Approx(3.5));
  }
  SUBCASE("below the sampled objective on random data") {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 2 + rng.uniform_int(4);
      Matrix M = rng.normal_matrix(n, n);
      const Matrix Q = 0.5 * (M + M.transpose());
      const Vector b = rng.normal_vector(n);
      const double c = rng.uniform(-2.0, 2.0);
      const double l1 = rng.uniform(0.0, 0.5);
      const double r = rng.uniform(0.5, 3.0);
      const double bound = quadratic_box_lower_bound(Q, b, c, l1, r);
      for (int s = 0; s < 500; ++s) {
        const Vector x = rng.uniform_vector(n, -r, r);
        const double f = 0.5 * x.dot(Q * x) + b.dot(x) + c + l1 * x.lpNorm<1>();
        CHECK(f >= bound - 1e-9);
      }
    }
  }
}

TEST_CASE("every family respects its certified lower bound on sampled points") {
  Rng rng(22);
  SUBCASE("consensus families") {
    for (const std::string family : {"quadratic", "quadratic-sharp", "sigmoid"}) {
      for (std::uint64_t seed : {1, 2, 3}) {
        const ConsensusInstance instance = make_consensus_instance(family, seed);
        for (int s = 0; s < 1000; ++s) {
          const Vector x = random_feasible(instance.problem.set, rng);
          CHECK(instance.problem.objective(x) >= instance.f_lower - 1e-9);
        }
      }
    }
  }
  SUBCASE("sharing families") {
    for (const std::string family : {"sharing-quadratic", "sharing-cos", "sharing-mixed"}) {
      for (std::uint64_t seed : {1, 2}) {
        const SharingInstance instance = make_sharing_instance(family, seed);
        for (int s = 0; s < 500; ++s) {
          std::vector<Vector> xs;
          for (const auto& block : instance.problem.blocks)
            xs.push_back(random_feasible(block.set, rng));
          CHECK(instance.problem.objective(xs) >= instance.f_lower - 1e-9);
        }
      }
    }
  }
  SUBCASE("two-block family, sampled on the constraint manifold") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const TwoBlockInstance instance = make_two_block_instance("two-block", seed);
      const auto& p = instance.problem;
      const Eigen::PartialPivLU<Matrix> lu(p.A);
      for (int s = 0; s < 500; ++s) {
        const Vector x1 = random_feasible(p.set, rng);
        const Vector x2 = lu.solve(p.c - p.B * x1);
        const double f = p.f.value(x1) + p.g.value(x2);
        CHECK(f >= instance.f_lower - 1e-9);
      }
    }
  }
}

TEST_CASE("declared Lipschitz constants and gradients validate") {
  for (const std::string family : {"quadratic", "quadratic-sharp", "sigmoid"}) {
    const ConsensusInstance instance = make_consensus_instance(family, 4);
    CHECK(validate(instance.problem).all_passed());
  }
  for (const std::string family : {"sharing-quadratic", "sharing-cos", "sharing-mixed"}) {
    const SharingInstance instance = make_sharing_instance(family, 4);
    CHECK(validate(instance.problem).all_passed());
  }
  const TwoBlockInstance two_block = make_two_block_instance("two-block", 4);
  CHECK(validate(two_block.problem).all_passed());
}

TEST_CASE("quadratic Lipschitz constants equal the spectral norm") {
  QuadraticFamilyOptions options;
  options.num_blocks = 3;
  options.dim = 5;
  const ConsensusDesc desc = quadratic_consensus_desc(options, 31);
  for (const auto& block : desc.blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block.Q);
    const double spectral = eig.eigenvalues().cwiseAbs().maxCoeff();
    CHECK(block.lipschitz == doctest::Approx(spectral).epsilon(1e-9));
  }
}

TEST_CASE("the sharp variant pins both ends of the eigenvalue range") {
  QuadraticFamilyOptions options;
  options.num_blocks = 2;
  options.dim = 6;
  options.nonconvexity = 0.8;
  options.sharp = true;
  const ConsensusDesc desc = quadratic_consensus_desc(options, 12);
  for (const auto& block : desc.blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block.Q);
    CHECK(eig.eigenvalues().minCoeff() == doctest::Approx(-0.8).epsilon(1e-9));
    CHECK(eig.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sigmoid blocks carry the analytic curvature bound") {
  SigmoidFamilyOptions options;
  options.num_blocks = 2;
  options.dim = 3;
  options.terms = 5;
  const ConsensusDesc desc = sigmoid_consensus_desc(options, 3);
  const double curvature = 1.0 / (6.0 * std::sqrt(3.0));
  for (const auto& block : desc.blocks) {
    CHECK(block.lipschitz ==
          doctest::Approx(curvature * block.A.squaredNorm()).epsilon(1e-12));
  }

  SUBCASE("the scalar logistic curvature peaks at that constant") {
    const auto second_derivative = [](double z) {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    };
    double peak = 0.0;
    for (double z = -6.0; z <= 6.0; z += 1e-4) peak = std::max(peak, std::abs(second_derivative(z)));
    CHECK(peak == doctest::Approx(curvature).epsilon(1e-6));
    CHECK(curvature == doctest::Approx(0.09622504486493762).epsilon(1e-15));
  }
}

TEST_CASE("coupling maps keep their conditioning floors") {
  SharingFamilyOptions soptions;
  soptions.num_blocks = 4;
  soptions.block_dim = 3;
  soptions.m = 5;
  for (std::uint64_t seed : {1, 5, 9}) {
    const SharingInstance instance = realize(sharing_desc(soptions, seed));
    for (const auto& block : instance.problem.blocks) {
      CHECK(block.lambda_min_AtA >= 0.01 - 1e-12);
      const double smallest = smallest_singular_value(block.A);
      CHECK(block.lambda_min_AtA == doctest::Approx(smallest * smallest).epsilon(1e-8));
    }
  }
  for (std::uint64_t seed : {1, 5, 9}) {
    const TwoBlockInstance instance = make_two_block_instance("two-block", seed);
    CHECK(instance.problem.lambda_min_AAt >= 0.25 - 1e-12);
    CHECK(smallest_singular_value(instance.problem.B) >= 0.3 - 1e-12);
  }
}

TEST_CASE("a convex instance is solved to global optimality by the estimator") {
  QuadraticFamilyOptions options;
  options.num_blocks = 2;
  options.dim = 4;
  options.nonconvexity = 0.0;
  options.l1_weight = 0.0;
  const ConsensusInstance instance = realize(quadratic_consensus_desc(options, 8));
  for (const auto& block : instance.problem.blocks) CHECK(block.is_convex);

  // Independent reference: projected gradient on the summed objective.
  Matrix Q_sum = Matrix::Zero(4, 4);
  Vector b_sum = Vector::Zero(4);
  double lipschitz_sum = 0.0;
  for (const auto& block : instance.problem.blocks) {
    Q_sum += block.quad->Q;
    b_sum += block.quad->b;
    lipschitz_sum += block.lipschitz;
  }
  const double radius = instance.problem.set.hi(0);
  const Vector minimizer = oracle::projected_gradient(
      [&](const Vector& x) { return (Q_sum * x + b_sum).eval(); },
      [&](const Vector& x) { return oracle::clamp_box(x, radius); }, Vector::Zero(4),
      1.0 / std::max(lipschitz_sum, 1e-12), 200000);
  const double reference = instance.problem.objective(minimizer);

  const double estimate = estimate_best_objective(instance.problem, 20, 99);
  CHECK(estimate == doctest::Approx(reference).epsilon(1e-6));
  CHECK(estimate >= instance.f_lower - 1e-9);
}

TEST_CASE("best-objective estimates are deterministic and above the bound") {
  const ConsensusInstance instance = make_consensus_instance("quadratic", 17);
  const double a = estimate_best_objective(instance.problem, 10, 5);
  const double b = estimate_best_objective(instance.problem, 10, 5);
  CHECK(a == b);
  CHECK(a >= instance.f_lower - 1e-9);
}

TEST_CASE("random orthogonal matrices") {
  Rng rng(41);
  for (int n : {2, 5, 8}) {
    const Matrix Q = random_orthogonal(n, rng);
    CHECK((Q.transpose() * Q - Matrix::Identity(n, n)).norm() <= 1e-12);
  }
  Rng rng_a(7), rng_b(7);
  CHECK(random_orthogonal(4, rng_a) == random_orthogonal(4, rng_b));
}

TEST_CASE("family name lookup") {
  CHECK(is_consensus_family("quadratic"));
  CHECK(is_consensus_family("sigmoid"));
  CHECK(!is_consensus_family("sharing-cos"));
  CHECK(is_sharing_family("sharing-mixed"));
  CHECK(is_two_block_family("two-block"));
  CHECK(!is_two_block_family("quadratic"));
  CHECK_THROWS_AS(make_consensus_instance("nope", 1), ValidationError);
  CHECK_THROWS_AS(make_sharing_instance("quadratic", 1), ValidationError);
  CHECK_THROWS_AS(make_two_block_instance("sigmoid", 1), ValidationError);
}

TEST_CASE("family shapes follow the option structs") {
  const ConsensusInstance quadratic = make_consensus_instance("quadratic", 1);
  CHECK(quadratic.problem.num_blocks() == 5);
  CHECK(quadratic.problem.dim() == 10);
  CHECK(quadratic.family == "quadratic");

  const ConsensusInstance sigmoid = make_consensus_instance("sigmoid", 1);
  CHECK(sigmoid.problem.num_blocks() == 4);
  CHECK(sigmoid.problem.dim() == 8);
  CHECK(sigmoid.f_lower == doctest::Approx(0.0));

  const SharingInstance mixed = make_sharing_instance("sharing-mixed", 1);
  CHECK(mixed.problem.num_blocks() == 4);
  bool has_prox = false;
  for (const auto& block : mixed.problem.blocks)
    if (block.kind == SharingBlock::Kind::ConvexProx) has_prox = true;
  CHECK(has_prox);

  const TwoBlockInstance two_block = make_two_block_instance("two-block", 1);
  CHECK(two_block.problem.n1() == 4);
  CHECK(two_block.problem.m() == 6);

  CHECK_THROWS_AS(
      [] {
        QuadraticFamilyOptions bad;
        bad.box_radius = 0.0;
        quadratic_consensus_desc(bad, 1);
      }(),
      ValidationError);
  CHECK_THROWS_AS(
      [] {
        SharingFamilyOptions bad;
        bad.block_dim = 9;
        bad.m = 3;
        sharing_desc(bad, 1);
      }(),
      ValidationError);
}
