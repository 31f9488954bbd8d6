#pragma once

#include <string>
#include <vector>

#include "ncadmm/problem.hpp"

namespace ncadmm {

/// One validation check outcome. `worst` is check-specific (largest relative
/// gradient error, largest Lipschitz ratio, smallest eigenvalue, ...).
struct ValidationItem {
  std::string name;
  bool passed = false;
  double worst = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  bool all_passed() const {
    for (const auto& item : items)
      if (!item.passed) return false;
    return true;
  }
};

struct ValidationOptions {
  std::uint64_t seed = 12345;
  int gradient_samples = 10;   ///< finite-difference probe points per function
  int lipschitz_samples = 25;  ///< sampled point pairs per function
  double sample_radius = 3.0;  ///< probes are drawn uniformly from this box
  double gradient_rel_tol = 1e-5;
};

/// Checks dimensions, finite-difference agreement of every gradient, and the
/// declared Lipschitz constants on sampled pairs. Dimension mismatches and
/// Lipschitz violations throw (the latter with the witness pair in the
/// message); soft outcomes land in the report.
ValidationReport validate(const ConsensusProblem& problem, const ValidationOptions& opts = {});

/// Adds full-column-rank checks of every A_k and the coupling gradient probe.
/// Rank deficiency throws ValidationError.
ValidationReport validate(const SharingProblem& problem, const ValidationOptions& opts = {});

/// Adds the invertibility check of A.
ValidationReport validate(const TwoBlockProblem& problem, const ValidationOptions& opts = {});

}  // namespace ncadmm
