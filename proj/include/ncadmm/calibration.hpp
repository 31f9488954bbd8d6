#pragma once

#include <vector>

#include "ncadmm/problem.hpp"

namespace ncadmm {

/// Penalty parameters plus the certified constants that came out of
/// calibration. gamma holds conservative per-block strong-convexity moduli of
/// the subproblems and gamma0 the modulus of the shared-variable subproblem;
/// runtime descent checks use exactly these values.
struct PenaltyParams {
  enum class Mode { Consensus, Proximal, Sharing, TwoBlock };

  Mode mode = Mode::Consensus;
  std::vector<double> rho;  ///< per block; single entry for sharing/two-block
  double margin = 1.01;
  std::vector<double> gamma;
  double gamma0 = 0.0;
  int period = 1;                   ///< schedule period T baked into proximal constants
  std::vector<double> alpha, beta;  ///< proximal-mode descent coefficients
  bool override_flag = false;       ///< set when the caller bypassed calibration

  double rho_scalar() const { return rho.at(0); }
  double rho_sum() const;
};

/// Conservative lower bound on the strong-convexity modulus of the x_k
/// subproblem: rho for convex blocks, rho - lipschitz otherwise.
double modulus_lower_bound(double lipschitz, double rho, bool is_convex);

/// Proximal-mode descent coefficients; positive values certify descent.
double proximal_alpha(double lipschitz, double rho);
double proximal_beta(double lipschitz, double rho, int period);

/// Smallest penalties satisfying rho_k * gamma_k(rho_k) > 2 L_k^2 and
/// rho_k >= L_k, scaled by margin (> 1). Blocks with L_k = 0 receive the
/// floor 1e-3 * max(1, mean L).
PenaltyParams calibrate_consensus(const std::vector<double>& lipschitz,
                                  const std::vector<bool>& is_convex, double margin = 1.01);

/// Smallest penalties with rho_k >= 5 L_k, alpha_k > 0 and beta_k > 0
/// (found by bisection; both coefficients increase in rho), scaled by margin.
PenaltyParams calibrate_proximal(const std::vector<double>& lipschitz, int period,
                                 double margin = 1.01);

/// Single penalty for the sharing problem: the maximum of the coupling
/// threshold (sqrt(2) L when l is convex, 2 L otherwise), rho >= L, and the
/// per-nonconvex-block root of rho^2 lambda_k - rho L_k - 2 L_k^2, scaled by
/// margin. When every piece is convex this reduces to margin * sqrt(2) L.
PenaltyParams calibrate_sharing(const SharingProblem& problem, double margin = 1.01);

/// margin * L_g / lambda_min(AA'), raised further until the x2 subproblem
/// modulus rho * lambda_min(A'A) - L_g clears zero with the same margin.
PenaltyParams calibrate_two_block(const TwoBlockProblem& problem, double margin = 1.01);

/// Parameters from explicitly chosen penalties. The moduli and proximal
/// coefficients are filled with the same formulas calibration uses, but the
/// penalties themselves are taken as given and may violate the calibration
/// conditions; pair with calibration_violations and override_flag to run
/// anyway.
PenaltyParams penalties_from_rho_consensus(const std::vector<double>& rho,
                                           const std::vector<double>& lipschitz,
                                           const std::vector<bool>& is_convex);
PenaltyParams penalties_from_rho_proximal(const std::vector<double>& rho,
                                          const std::vector<double>& lipschitz, int period);
PenaltyParams penalties_from_rho_sharing(double rho, const SharingProblem& problem);
PenaltyParams penalties_from_rho_two_block(double rho, const TwoBlockProblem& problem);

/// Iteration-complexity constants of the consensus progress-measure bound.
struct ComplexityConstants {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma3 = 0.0;
  double C = 0.0;  ///< sigma3 / sigma2
};

/// sigma1 = max(2 + 2 sum rho_k, max_k (L_k + rho_k)),
/// sigma2 = min(min_k (gamma_k/2 - L_k^2/rho_k), gamma0/2),
/// sigma3 = sigma1^2 (K+1) + sum_k (L_k/rho_k)^2.
/// sigma3 combines the two step-to-progress chains: the tilde-gradient norm
/// is at most sigma1 times the sum of the K+1 step norms (Cauchy-Schwarz
/// turns its square into sigma1^2 (K+1) times the sum of squares), and each
/// consensus gap equals a dual step over rho_k, itself at most (L_k/rho_k)
/// times a block step. Throws CalibrationError when sigma2 <= 0.
ComplexityConstants complexity_constants(const PenaltyParams& params,
                                         const std::vector<double>& lipschitz);

/// Human-readable list of violated calibration conditions; empty when the
/// parameters are properly calibrated for their mode.
std::vector<std::string> calibration_violations(const PenaltyParams& params,
                                                const std::vector<double>& lipschitz,
                                                const std::vector<bool>& is_convex);
std::vector<std::string> calibration_violations(const PenaltyParams& params,
                                                const SharingProblem& problem);
std::vector<std::string> calibration_violations(const PenaltyParams& params,
                                                const TwoBlockProblem& problem);

}  // namespace ncadmm
