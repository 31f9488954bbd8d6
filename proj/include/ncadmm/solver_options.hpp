#pragma once

#include "ncadmm/calibration.hpp"
#include "ncadmm/schedule.hpp"

namespace ncadmm {

/// How much runtime checking a run performs.
///   Off:   only the trace quantities are computed.
///   Cheap: every per-iteration check runs and violations are counted.
///   Full:  a violation beyond tolerance aborts the run (CheckViolationError).
enum class CheckLevel { Off, Cheap, Full };

enum class StopReason { Converged, MaxIters };

struct SolverConfig {
  PenaltyParams params;
  Schedule schedule;
  long max_iters = 1000;
  double stop_tol = 1e-10;  ///< on the progress measure recorded as P_value
  InnerOptions inner;
  CheckLevel check_level = CheckLevel::Cheap;
  bool record_snapshots = true;
  /// Populate wall_ms with real timings. Off by default because timings are
  /// nondeterministic and the trace promises byte-identical reruns.
  bool timing = false;
};

}  // namespace ncadmm
