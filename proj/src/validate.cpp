#include "ncadmm/validate.hpp"

#include <cmath>
#include <sstream>

#include "ncadmm/diagnostics.hpp"
#include "ncadmm/errors.hpp"
#include "ncadmm/rng.hpp"

namespace ncadmm {

namespace {

std::string vec_to_string(const Vector& x) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

ValidationItem check_gradient(const std::string& name, const SmoothBlock& block, Rng& rng,
                              const ValidationOptions& opts) {
  ValidationItem item{name + ".finite_diff_gradient", true, 0.0, ""};
  for (int s = 0; s < opts.gradient_samples; ++s) {
    const Vector x = rng.uniform_vector(block.dim, -opts.sample_radius, opts.sample_radius);
    const Vector g = eval_block(block, x).second;
    const Vector fd = finite_diff_gradient([&](const Vector& p) { return block.value(p); }, x);
    const double rel = (g - fd).norm() / (1.0 + g.norm());
    if (rel > item.worst) item.worst = rel;
  }
  if (item.worst > opts.gradient_rel_tol) {
    item.passed = false;
    item.detail = "finite-difference gradient disagrees with grad_fn";
  }
  return item;
}

ValidationItem check_lipschitz(const std::string& name, const SmoothBlock& block, Rng& rng,
                               const ValidationOptions& opts) {
  ValidationItem item{name + ".sampled_lipschitz", true, 0.0, ""};
  for (int s = 0; s < opts.lipschitz_samples; ++s) {
    const Vector x = rng.uniform_vector(block.dim, -opts.sample_radius, opts.sample_radius);
    const Vector z = rng.uniform_vector(block.dim, -opts.sample_radius, opts.sample_radius);
    const double dist = (x - z).norm();
    if (dist < 1e-12) continue;
    const double ratio = (eval_block(block, x).second - eval_block(block, z).second).norm() / dist;
    if (ratio > item.worst) item.worst = ratio;
    if (ratio > block.lipschitz * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << name << ": sampled Lipschitz violation, ratio " << ratio << " exceeds declared "
         << block.lipschitz << " at x=" << vec_to_string(x) << ", z=" << vec_to_string(z);
      throw ValidationError(os.str());
    }
  }
  return item;
}

ValidationItem dims_item(const std::string& detail) {
  return ValidationItem{"dimensions", true, 0.0, detail};
}

}  // namespace

ValidationReport validate(const ConsensusProblem& problem, const ValidationOptions& opts) {
  // Construction already enforces dimension consistency; record it.
  ValidationReport report;
  report.items.push_back(dims_item("K=" + std::to_string(problem.num_blocks()) +
                                   ", n=" + std::to_string(problem.dim())));
  Rng rng(opts.seed);
  for (int k = 0; k < problem.num_blocks(); ++k) {
    const std::string name = "block_" + std::to_string(k + 1);
    report.items.push_back(check_gradient(name, problem.blocks[k], rng, opts));
    report.items.push_back(check_lipschitz(name, problem.blocks[k], rng, opts));
  }
  return report;
}

ValidationReport validate(const SharingProblem& problem, const ValidationOptions& opts) {
  ValidationReport report;
  report.items.push_back(dims_item("K=" + std::to_string(problem.num_blocks()) +
                                   ", M=" + std::to_string(problem.m())));
  Rng rng(opts.seed);
  for (int k = 0; k < problem.num_blocks(); ++k) {
    const auto& block = problem.blocks[k];
    const std::string name = "block_" + std::to_string(k + 1);
    ValidationItem rank{name + ".full_column_rank", true, block.lambda_min_AtA, ""};
    if (block.lambda_min_AtA <= 0.0) {
      throw ValidationError(name + ": A is column rank deficient (lambda_min(A'A) = " +
                            std::to_string(block.lambda_min_AtA) + ")");
    }
    report.items.push_back(rank);
    if (block.kind == SharingBlock::Kind::Smooth) {
      report.items.push_back(check_gradient(name, block.g, rng, opts));
      report.items.push_back(check_lipschitz(name, block.g, rng, opts));
    }
  }
  report.items.push_back(check_gradient("coupling", problem.coupling, rng, opts));
  report.items.push_back(check_lipschitz("coupling", problem.coupling, rng, opts));
  return report;
}

ValidationReport validate(const TwoBlockProblem& problem, const ValidationOptions& opts) {
  ValidationReport report;
  report.items.push_back(dims_item("N1=" + std::to_string(problem.n1()) +
                                   ", M=" + std::to_string(problem.m())));
  ValidationItem inv{"A_invertible", problem.lambda_min_AAt > 1e-12, problem.lambda_min_AAt, ""};
  if (!inv.passed) throw ValidationError("TwoBlockProblem: A is singular");
  report.items.push_back(inv);
  Rng rng(opts.seed);
  report.items.push_back(check_gradient("g", problem.g, rng, opts));
  report.items.push_back(check_lipschitz("g", problem.g, rng, opts));
  return report;
}

}  // namespace ncadmm
