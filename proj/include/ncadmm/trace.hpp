#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncadmm/prox.hpp"

namespace ncadmm {

enum class AlgorithmKind { ConsensusExact, ConsensusProximal, Sharing, TwoBlock };

std::string algorithm_name(AlgorithmKind kind);
AlgorithmKind algorithm_from_name(const std::string& name);

/// One iteration of any solver. descent_margin is rhs-minus-lhs of the
/// mode's descent inequality (cumulative in proximal mode, plain
/// monotonicity in two-block mode); nonnegative means the inequality held.
struct TraceRow {
  long iter = 0;
  double L_value = 0.0;
  double feas_gap = 0.0;
  double P_value = 0.0;
  double block_step_sq = 0.0;
  double x0_step_sq = 0.0;
  double dual_step_sq = 0.0;
  std::uint64_t fired_mask = 0;  ///< bit i set when index i fired (0 = shared variable)
  double descent_margin = 0.0;
  double wall_ms = 0.0;
};

/// Full primal/dual state after one iteration. Consensus: x0 plus K xs/ys.
/// Sharing: x0, K xs, one y. Two-block: xs = {x1, x2}, one y, empty x0.
struct Snapshot {
  Vector x0;
  std::vector<Vector> xs;
  std::vector<Vector> ys;
};

/// Everything a run leaves behind for offline checking. snapshots[0] is the
/// initial state; snapshots[t] the state after iteration t.
struct RunRecord {
  AlgorithmKind algorithm = AlgorithmKind::ConsensusExact;
  std::vector<TraceRow> rows;
  std::vector<Snapshot> snapshots;
  bool has_snapshots = false;
  bool override_flag = false;
  double inner_tol = 1e-10;
};

/// Shortest decimal form that round-trips a double (17 significant digits).
std::string format_double(double v);

/// CSV with the fixed column order
/// iter,L_value,feas_gap,P_value,block_step_sq,x0_step_sq,dual_step_sq,
/// fired_mask,descent_margin,wall_ms. Writing is byte-deterministic.
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const std::string& path);

void write_states(const std::string& path, const RunRecord& record);
/// Loads snapshots (and algorithm kind) from a states file into an otherwise
/// empty record.
RunRecord read_states(const std::string& path);

}  // namespace ncadmm
