#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ncadmm/calibration.hpp"
#include "ncadmm/problem.hpp"
#include "ncadmm/trace.hpp"

namespace ncadmm {

/// Checks compare quantities solved to inner tolerance, so violations only
/// count beyond this inflation of the inner tolerance.
inline double check_tolerance(const InnerOptions& inner) { return 1e-9 + 10.0 * inner.tol; }

/// Augmented Lagrangian of the consensus splitting:
/// sum_k g_k(x_k) + h(x0) + sum_k <y_k, x_k - x0> + sum_k rho_k/2 ||x_k - x0||^2.
double consensus_lagrangian(const ConsensusProblem& problem, const Vector& x0,
                            const std::vector<Vector>& xs, const std::vector<Vector>& ys,
                            const std::vector<double>& rho);

/// Augmented Lagrangian of the sharing splitting:
/// sum_k g_k(x_k) + l(x0) + <y, x0 - sum A_k x_k> + rho/2 ||x0 - sum A_k x_k||^2.
double sharing_lagrangian(const SharingProblem& problem, const std::vector<Vector>& xs,
                          const Vector& x0, const Vector& y, double rho);

/// f(x1) + g(x2) + <y, B x1 + A x2 - c> + rho/2 ||B x1 + A x2 - c||^2.
double two_block_lagrangian(const TwoBlockProblem& problem, const Vector& x1, const Vector& x2,
                            const Vector& y, double rho);

/// Proximal gradient of the consensus Lagrangian, stacked as
/// (x0 component, block 1, ..., block K). The x0 component folds the
/// feasible-set indicator into h via the combined prox (unit weight); block
/// components are plain partial gradients. Zero exactly at stationarity.
Vector consensus_prox_gradient(const ConsensusProblem& problem, const Vector& x0,
                               const std::vector<Vector>& xs, const std::vector<Vector>& ys,
                               const std::vector<double>& rho, const InnerOptions& inner = {});

/// Progress measure: ||prox gradient||^2 + sum_k ||x_k - x0||^2.
double consensus_progress(const ConsensusProblem& problem, const Vector& x0,
                          const std::vector<Vector>& xs, const std::vector<Vector>& ys,
                          const std::vector<double>& rho, const InnerOptions& inner = {});

/// Stationarity residuals of the consensus limit conditions.
struct ConsensusResiduals {
  double grad_dual = 0.0;      ///< max_k ||grad g_k(x_k) + y_k||
  double x0_model = 0.0;       ///< ||x0 - prox_{h+X}[x0 + sum y_k]||
  double consensus_gap = 0.0;  ///< max_k ||x_k - x0||
  double max() const;
};
ConsensusResiduals consensus_stationarity(const ConsensusProblem& problem, const Vector& x0,
                                          const std::vector<Vector>& xs,
                                          const std::vector<Vector>& ys,
                                          const InnerOptions& inner = {});

/// Sum of squared sharing residuals: every block fixed-point residual, the
/// coupling identity, and the feasibility gap. Zero exactly at stationarity.
double sharing_progress(const SharingProblem& problem, const std::vector<Vector>& xs,
                        const Vector& x0, const Vector& y, const InnerOptions& inner = {});

/// Counterpart for the two-block splitting.
double two_block_progress(const TwoBlockProblem& problem, const Vector& x1, const Vector& x2,
                          const Vector& y, const InnerOptions& inner = {});

/// Stationarity residuals of the sharing limit conditions.
struct SharingResiduals {
  double block_worst = 0.0;    ///< worst per-block fixed-point residual
  double coupling_grad = 0.0;  ///< ||grad l(x0) + y||
  double feasibility = 0.0;    ///< ||sum A_k x_k - x0||
  double max() const;
};
SharingResiduals sharing_stationarity(const SharingProblem& problem,
                                      const std::vector<Vector>& xs, const Vector& x0,
                                      const Vector& y, const InnerOptions& inner = {});

/// Stationarity residuals of the two-block limit conditions.
struct TwoBlockResiduals {
  double x1_model = 0.0;     ///< ||x1 - prox_{f+X}[x1 - B'y]||
  double x2_grad = 0.0;      ///< ||grad g(x2) + A'y||
  double feasibility = 0.0;  ///< ||B x1 + A x2 - c||
  double max() const;
};
TwoBlockResiduals two_block_stationarity(const TwoBlockProblem& problem, const Vector& x1,
                                         const Vector& x2, const Vector& y,
                                         const InnerOptions& inner = {});

/// Smallest finite-difference slope of the x0 model h(x) - <sum y_k, x> over
/// sampled feasible directions from x0 (steps stay inside X by convexity).
/// Nonnegative, up to residual error, exactly when x0 solves its subproblem.
double x0_model_min_directional_slope(const ConsensusProblem& problem, const Vector& x0,
                                      const std::vector<Vector>& ys, int num_directions,
                                      double eps, std::uint64_t seed);

/// Central finite-difference gradient, the reference every grad_fn is
/// validated against.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                            double step = 1e-6);

/// Tally of one named check over a run.
struct CheckCounter {
  long checked = 0;
  long violations = 0;
  double worst = 0.0;     ///< largest excess beyond tolerance (0 when clean)
  long first_fail = -1;   ///< iteration of the first violation
  void count(double excess, long iter);
  bool passed() const { return violations == 0; }
};

struct CheckReport {
  std::vector<std::pair<std::string, CheckCounter>> items;
  CheckCounter& item(const std::string& name);
  const CheckCounter* find(const std::string& name) const;
  bool all_passed() const;
};

/// Per-iteration dual-step bounds, recomputed from snapshots.
/// Consensus exact: ||dy_k|| <= L_k ||dx_k|| per fired block.
/// Consensus proximal: ||dy_k||^2 <= 2 L_k^2 (4 ||x0^t - x0^{t(k)}||^2 + ||dx_k||^2).
/// Sharing: ||dy|| <= L ||dx0||. Two-block: ||dy|| <= Ls[0] ||dx2|| with
/// Ls[0] = L_g / sqrt(lambda_min(AA')).
CheckReport check_dual_bound(const RunRecord& record, const std::vector<double>& lipschitz,
                             double tol);

/// Descent inequality of the record's mode, recomputed from snapshots, plus a
/// consistency item comparing trace L_value against the snapshot Lagrangian.
CheckReport check_descent(const RunRecord& record, const ConsensusProblem& problem,
                          const PenaltyParams& params, double tol);
CheckReport check_descent(const RunRecord& record, const SharingProblem& problem,
                          const PenaltyParams& params, double tol);
CheckReport check_descent(const RunRecord& record, const TwoBlockProblem& problem,
                          const PenaltyParams& params, double tol);

/// Lagrangian lower bounds: L^t >= f(x0^t) for consensus modes;
/// L^t >= objective(xs) + (rho - L)/2 ||x0 - sum A_k x_k||^2 for sharing.
CheckReport check_lower_bound(const RunRecord& record, const ConsensusProblem& problem,
                              double tol);
CheckReport check_lower_bound(const RunRecord& record, const SharingProblem& problem,
                              const PenaltyParams& params, double tol);

/// First-order identities that exact updates must satisfy:
/// grad g_k(x_k) + y_k = 0 after exact consensus updates,
/// grad g_k(x0) + L_k (x_k - x0) + y_k = 0 after proximal updates,
/// grad l(x0) + y = 0 after sharing x0 updates.
CheckReport check_identities(const RunRecord& record, const ConsensusProblem& problem,
                             const PenaltyParams& params, double tol);
CheckReport check_identities(const RunRecord& record, const SharingProblem& problem,
                             const PenaltyParams& params, double tol);

/// Sub-epsilon iteration-complexity certificate: along the trace,
/// (min so far of P) * t must stay below C * (L_initial - f_lower), where
/// L_initial is the Lagrangian at the starting point. Sound for full-sweep
/// exact consensus runs.
struct CertificateResult {
  bool holds = true;
  double budget = 0.0;  ///< C * (L_initial - f_lower)
  double worst_product = 0.0;
  long worst_iter = 0;
};
CertificateResult complexity_certificate(const std::vector<TraceRow>& rows,
                                         const ComplexityConstants& constants, double L_initial,
                                         double f_lower);

}  // namespace ncadmm
