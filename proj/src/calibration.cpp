#include "ncadmm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "ncadmm/errors.hpp"

namespace ncadmm {

namespace {

double zero_lipschitz_floor(const std::vector<double>& lipschitz) {
  const double mean =
      lipschitz.empty()
          ? 0.0
          : std::accumulate(lipschitz.begin(), lipschitz.end(), 0.0) / lipschitz.size();
  return 1e-3 * std::max(1.0, mean);
}

void require_margin(double margin) {
  if (!(margin > 1.0))
    throw CalibrationError("calibrate: margin must exceed 1 (strict inequalities need headroom)");
}

/// Smallest rho with pred(rho) true, assuming pred is monotone in rho and
/// pred(hi) holds. lo is a known infeasible (or boundary) point.
double bisect_threshold(double lo, double hi, const std::function<bool(double)>& pred) {
  if (!pred(hi)) throw CalibrationError("calibrate: no feasible penalty below the search cap");
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

double PenaltyParams::rho_sum() const {
  return std::accumulate(rho.begin(), rho.end(), 0.0);
}

double modulus_lower_bound(double lipschitz, double rho, bool is_convex) {
  return is_convex ? rho : rho - lipschitz;
}

double proximal_alpha(double lipschitz, double rho) {
  const double L = lipschitz;
  return (rho - 7.0 * L) / 2.0 - (4.0 * L / (rho * rho) + 1.0 / rho) * 2.0 * L * L;
}

double proximal_beta(double lipschitz, double rho, int period) {
  const double L = lipschitz;
  const double T = static_cast<double>(period);
  return rho / 2.0 - T * T * (4.0 * L / (rho * rho) + 1.0 / rho) * 8.0 * L * L;
}

PenaltyParams calibrate_consensus(const std::vector<double>& lipschitz,
                                  const std::vector<bool>& is_convex, double margin) {
  if (lipschitz.empty()) throw DimensionError("calibrate_consensus: empty Lipschitz list");
  if (lipschitz.size() != is_convex.size())
    throw DimensionError("calibrate_consensus: flag list size mismatch");
  require_margin(margin);

  const double floor = zero_lipschitz_floor(lipschitz);
  PenaltyParams params;
  params.mode = PenaltyParams::Mode::Consensus;
  params.margin = margin;
  for (std::size_t k = 0; k < lipschitz.size(); ++k) {
    const double L = lipschitz[k];
    if (L < 0.0) throw CalibrationError("calibrate_consensus: negative Lipschitz constant");
    // rho (rho - L) = 2 L^2 has smallest positive root 2L; the convex case
    // rho^2 = 2 L^2 gives sqrt(2) L. Both already dominate rho >= L.
    const double rho_star = is_convex[k] ? std::sqrt(2.0) * L : 2.0 * L;
    const double rho = std::max(margin * rho_star, floor);
    params.rho.push_back(rho);
    params.gamma.push_back(modulus_lower_bound(L, rho, is_convex[k]));
  }
  params.gamma0 = params.rho_sum();
  return params;
}

PenaltyParams calibrate_proximal(const std::vector<double>& lipschitz, int period,
                                 double margin) {
  if (lipschitz.empty()) throw DimensionError("calibrate_proximal: empty Lipschitz list");
  if (period < 1) throw CalibrationError("calibrate_proximal: period must be at least 1");
  require_margin(margin);

  const double floor = zero_lipschitz_floor(lipschitz);
  PenaltyParams params;
  params.mode = PenaltyParams::Mode::Proximal;
  params.margin = margin;
  params.period = period;
  for (double L : lipschitz) {
    if (L < 0.0) throw CalibrationError("calibrate_proximal: negative Lipschitz constant");
    double rho;
    if (L == 0.0) {
      rho = floor;
    } else {
      const auto feasible = [&](double r) {
        return r >= 5.0 * L && proximal_alpha(L, r) > 0.0 && proximal_beta(L, r, period) > 0.0;
      };
      const double cap = 1e3 * period * period * std::max(L, 1.0);
      rho = margin * bisect_threshold(0.0, cap, feasible);
    }
    params.rho.push_back(rho);
    params.gamma.push_back(rho + L);  // modulus of the linearized subproblem
    params.alpha.push_back(proximal_alpha(L, rho));
    params.beta.push_back(proximal_beta(L, rho, period));
  }
  params.gamma0 = params.rho_sum();
  return params;
}

PenaltyParams calibrate_sharing(const SharingProblem& problem, double margin) {
  require_margin(margin);
  const double L = problem.coupling.lipschitz;
  double threshold = std::max(problem.coupling.is_convex ? std::sqrt(2.0) * L : 2.0 * L, L);
  for (const auto& block : problem.blocks) {
    if (block.kind != SharingBlock::Kind::Smooth || block.g.is_convex) continue;
    const double Lk = block.g.lipschitz;
    if (Lk == 0.0) continue;
    const double lam = block.lambda_min_AtA;
    // Smallest root of rho^2 lam - rho Lk - 2 Lk^2 = 0, which enforces both
    // the block modulus rho lam - Lk > 0 and rho gamma_k(rho) > 2 Lk^2.
    threshold = std::max(threshold, Lk * (1.0 + std::sqrt(1.0 + 8.0 * lam)) / (2.0 * lam));
  }

  PenaltyParams params;
  params.mode = PenaltyParams::Mode::Sharing;
  params.margin = margin;
  const double rho =
      threshold > 0.0 ? margin * threshold : 1e-3 * std::max(1.0, L);
  params.rho.push_back(rho);
  for (const auto& block : problem.blocks) {
    const bool convex = block.kind == SharingBlock::Kind::ConvexProx || block.g.is_convex;
    const double Lk = block.kind == SharingBlock::Kind::Smooth ? block.g.lipschitz : 0.0;
    params.gamma.push_back(rho * block.lambda_min_AtA - (convex ? 0.0 : Lk));
  }
  params.gamma0 = modulus_lower_bound(L, rho, problem.coupling.is_convex);
  return params;
}

PenaltyParams calibrate_two_block(const TwoBlockProblem& problem, double margin) {
  require_margin(margin);
  const double Lg = problem.g.lipschitz;
  const double lam_AAt = problem.lambda_min_AAt;
  const double lam_AtA = problem.lambda_min_AAt;  // same spectrum for square A

  PenaltyParams params;
  params.mode = PenaltyParams::Mode::TwoBlock;
  params.margin = margin;
  if (Lg == 0.0) {
    params.rho.push_back(1e-3);
  } else {
    const double base = margin * Lg / lam_AAt;
    // Raise until the x2 subproblem modulus rho lam_min(A'A) - Lg clears zero
    // with the same margin.
    const double lift = margin * Lg / lam_AtA;
    params.rho.push_back(std::max(base, lift));
  }
  params.gamma0 = params.rho_scalar() * lam_AtA - Lg;
  return params;
}

PenaltyParams penalties_from_rho_consensus(const std::vector<double>& rho,
                                           const std::vector<double>& lipschitz,
                                           const std::vector<bool>& is_convex) {
  if (rho.size() != lipschitz.size() || rho.size() != is_convex.size())
    throw DimensionError("penalties_from_rho_consensus: list size mismatch");
  PenaltyParams params;
  params.mode = PenaltyParams::Mode::Consensus;
  params.rho = rho;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (!(rho[k] > 0.0))
      throw CalibrationError("penalties_from_rho_consensus: penalties must be positive");
    params.gamma.push_back(modulus_lower_bound(lipschitz[k], rho[k], is_convex[k]));
  }
  params.gamma0 = params.rho_sum();
  return params;
}

PenaltyParams penalties_from_rho_proximal(const std::vector<double>& rho,
                                          const std::vector<double>& lipschitz, int period) {
  if (rho.size() != lipschitz.size())
    throw DimensionError("penalties_from_rho_proximal: list size mismatch");
  if (period < 1) throw CalibrationError("penalties_from_rho_proximal: period must be at least 1");
  PenaltyParams params;
  params.mode = PenaltyParams::Mode::Proximal;
  params.period = period;
  params.rho = rho;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (!(rho[k] > 0.0))
      throw CalibrationError("penalties_from_rho_proximal: penalties must be positive");
    params.gamma.push_back(rho[k] + lipschitz[k]);
    params.alpha.push_back(proximal_alpha(lipschitz[k], rho[k]));
    params.beta.push_back(proximal_beta(lipschitz[k], rho[k], period));
  }
  params.gamma0 = params.rho_sum();
  return params;
}

PenaltyParams penalties_from_rho_sharing(double rho, const SharingProblem& problem) {
  if (!(rho > 0.0))
    throw CalibrationError("penalties_from_rho_sharing: penalty must be positive");
  PenaltyParams params;
  params.mode = PenaltyParams::Mode::Sharing;
  params.rho.push_back(rho);
  for (const auto& block : problem.blocks) {
    const bool convex = block.kind == SharingBlock::Kind::ConvexProx || block.g.is_convex;
    const double Lk = block.kind == SharingBlock::Kind::Smooth ? block.g.lipschitz : 0.0;
    params.gamma.push_back(rho * block.lambda_min_AtA - (convex ? 0.0 : Lk));
  }
  params.gamma0 = modulus_lower_bound(problem.coupling.lipschitz, rho,
                                      problem.coupling.is_convex);
  return params;
}

PenaltyParams penalties_from_rho_two_block(double rho, const TwoBlockProblem& problem) {
  if (!(rho > 0.0))
    throw CalibrationError("penalties_from_rho_two_block: penalty must be positive");
  PenaltyParams params;
  params.mode = PenaltyParams::Mode::TwoBlock;
  params.rho.push_back(rho);
  params.gamma0 = rho * problem.lambda_min_AAt - problem.g.lipschitz;
  return params;
}

ComplexityConstants complexity_constants(const PenaltyParams& params,
                                         const std::vector<double>& lipschitz) {
  if (params.mode != PenaltyParams::Mode::Consensus)
    throw CalibrationError("complexity_constants: defined for consensus exact mode");
  if (params.rho.size() != lipschitz.size())
    throw DimensionError("complexity_constants: Lipschitz list size mismatch");
  const std::size_t K = lipschitz.size();

  ComplexityConstants out;
  double rho_sum = 0.0;
  double max_pair = 0.0;
  double gap_chain = 0.0;
  double worst_block = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    const double L = lipschitz[k];
    const double rho = params.rho[k];
    rho_sum += rho;
    max_pair = std::max(max_pair, L + rho);
    gap_chain += (L / rho) * (L / rho);
    worst_block = std::min(worst_block, params.gamma[k] / 2.0 - L * L / rho);
  }
  out.sigma1 = std::max(2.0 + 2.0 * rho_sum, max_pair);
  out.sigma2 = std::min(worst_block, params.gamma0 / 2.0);
  out.sigma3 = out.sigma1 * out.sigma1 * static_cast<double>(K + 1) + gap_chain;
  if (out.sigma2 <= 0.0) {
    std::ostringstream os;
    os << "complexity_constants: sigma2 = " << out.sigma2
       << " is not positive; penalties are not calibrated";
    throw CalibrationError(os.str());
  }
  out.C = out.sigma3 / out.sigma2;
  return out;
}

std::vector<std::string> calibration_violations(const PenaltyParams& params,
                                                const std::vector<double>& lipschitz,
                                                const std::vector<bool>& is_convex) {
  std::vector<std::string> out;
  if (params.rho.size() != lipschitz.size()) {
    out.push_back("penalty count differs from block count");
    return out;
  }
  for (std::size_t k = 0; k < lipschitz.size(); ++k) {
    const double L = lipschitz[k];
    const double rho = params.rho[k];
    std::ostringstream os;
    if (params.mode == PenaltyParams::Mode::Proximal) {
      if (rho < 5.0 * L) {
        os << "block " << k + 1 << ": rho = " << rho << " below 5 L = " << 5.0 * L;
        out.push_back(os.str());
      } else if (proximal_alpha(L, rho) <= 0.0 || proximal_beta(L, rho, params.period) <= 0.0) {
        os << "block " << k + 1 << ": alpha or beta not positive at rho = " << rho;
        out.push_back(os.str());
      }
    } else {
      const double gamma = modulus_lower_bound(L, rho, is_convex[k]);
      if (rho < L) {
        os << "block " << k + 1 << ": rho = " << rho << " below L = " << L;
        out.push_back(os.str());
      } else if (!(rho * gamma > 2.0 * L * L)) {
        os << "block " << k + 1 << ": rho * gamma = " << rho * gamma
           << " does not exceed 2 L^2 = " << 2.0 * L * L;
        out.push_back(os.str());
      }
    }
  }
  return out;
}

std::vector<std::string> calibration_violations(const PenaltyParams& params,
                                                const SharingProblem& problem) {
  std::vector<std::string> out;
  const double rho = params.rho_scalar();
  const double L = problem.coupling.lipschitz;
  const double gamma0 = modulus_lower_bound(L, rho, problem.coupling.is_convex);
  std::ostringstream os;
  if (rho < L) {
    os << "coupling: rho = " << rho << " below L = " << L;
    out.push_back(os.str());
  } else if (!(rho * gamma0 > 2.0 * L * L)) {
    os << "coupling: rho * gamma = " << rho * gamma0 << " does not exceed 2 L^2 = "
       << 2.0 * L * L;
    out.push_back(os.str());
  }
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const auto& block = problem.blocks[k];
    const bool convex = block.kind == SharingBlock::Kind::ConvexProx || block.g.is_convex;
    const double Lk = block.kind == SharingBlock::Kind::Smooth ? block.g.lipschitz : 0.0;
    const double gamma = rho * block.lambda_min_AtA - (convex ? 0.0 : Lk);
    if (gamma <= 0.0) {
      std::ostringstream bs;
      bs << "block " << k + 1 << ": subproblem modulus " << gamma << " not positive";
      out.push_back(bs.str());
    } else if (!convex && !(rho * gamma > 2.0 * Lk * Lk)) {
      std::ostringstream bs;
      bs << "block " << k + 1 << ": rho * gamma = " << rho * gamma
         << " does not exceed 2 L^2 = " << 2.0 * Lk * Lk;
      out.push_back(bs.str());
    }
  }
  return out;
}

std::vector<std::string> calibration_violations(const PenaltyParams& params,
                                                const TwoBlockProblem& problem) {
  std::vector<std::string> out;
  const double rho = params.rho_scalar();
  const double Lg = problem.g.lipschitz;
  if (!(rho * problem.lambda_min_AAt > Lg)) {
    std::ostringstream os;
    os << "rho * lambda_min(AA') = " << rho * problem.lambda_min_AAt
       << " does not exceed L_g = " << Lg;
    out.push_back(os.str());
  }
  return out;
}

}  // namespace ncadmm
