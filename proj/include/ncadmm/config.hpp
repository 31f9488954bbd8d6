#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncadmm/calibration.hpp"
#include "ncadmm/instance_io.hpp"
#include "ncadmm/schedule.hpp"
#include "ncadmm/solver_options.hpp"

namespace ncadmm {

/// [problem] section: a generator family with optional shape overrides, or a
/// serialized instance file (exactly one of the two). Unset overrides keep
/// the family default; setting one the family has no use for is an error.
struct ProblemConfig {
  std::string family;
  std::string file;
  std::uint64_t seed = 1;  ///< generator seed; ignored for file instances
  std::optional<int> num_blocks, dim, terms, block_dim, m, n1, num_prox_blocks;
  std::optional<double> nonconvexity, l1_weight, box_radius, ripple;
  std::optional<bool> nonconvex_coupling;
};

/// [algorithm] section. mode is consensus-exact, consensus-proximal, sharing,
/// or two-block; empty resolves to the class default (consensus-exact for
/// consensus instances).
struct AlgorithmConfig {
  std::string mode;
  long max_iters = 1000;
  double stop_tol = 1e-10;
  InnerOptions inner;
  CheckLevel check_level = CheckLevel::Cheap;
  bool record_snapshots = true;
  bool timing = false;
};

/// [schedule] section.
struct ScheduleConfig {
  std::string kind = "full";                ///< full | cyclic | randomized
  int period = 3;                           ///< cyclic: round-robin period
  std::vector<std::vector<int>> partition;  ///< cyclic: explicit cells, ';' separated
  double probability = 0.5;                 ///< randomized: shared inclusion probability
  std::vector<double> probabilities;        ///< randomized: per index, beats the scalar
  std::optional<bool> include_x0;           ///< unset: true except in proximal mode
  std::uint64_t seed = 0;                   ///< randomized draw seed
};

/// [penalty] section: empty rho means auto-calibration at the given margin.
/// For consensus runs a single value broadcasts across blocks.
struct PenaltyConfig {
  double margin = 1.01;
  std::vector<double> rho;
};

/// [output] section.
struct OutputConfig {
  bool states = false;  ///< also write the snapshot states file
};

struct RunConfig {
  ProblemConfig problem;
  AlgorithmConfig algorithm;
  ScheduleConfig schedule;
  PenaltyConfig penalty;
  OutputConfig output;
};

/// Parses the documented grammar: [section] headers, key = value lines,
/// everything after '#' ignored, blank lines skipped. Lists are
/// whitespace-separated; partition cells are separated by ';'. Unknown
/// sections or keys raise ConfigError with the message prefixed origin:line.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config_file(const std::string& path);

/// Materializes the [problem] section: reads the instance file when file= is
/// set, otherwise runs the named generator with overrides applied.
InstanceFile load_problem(const ProblemConfig& config);

/// Algorithm selector resolved against the instance's problem class; a mode
/// that does not fit the class is an error.
enum class RunMode { ConsensusExact, ConsensusProximal, Sharing, TwoBlock };
RunMode resolve_mode(const AlgorithmConfig& config, const std::string& problem_class);

/// Schedule over a K-block problem from the [schedule] section. include_x0
/// defaults by mode (false only for proximal, which also rejects true).
Schedule build_schedule(const ScheduleConfig& config, int num_blocks, RunMode mode);

/// Penalties from the [penalty] section: explicit rho when given, otherwise
/// auto-calibration at margin. override_on is copied to override_flag, which
/// lets the solver run despite calibration violations.
PenaltyParams resolve_penalties(const PenaltyConfig& config, const ConsensusProblem& problem,
                                RunMode mode, int period, bool override_on);
PenaltyParams resolve_penalties(const PenaltyConfig& config, const SharingProblem& problem,
                                bool override_on);
PenaltyParams resolve_penalties(const PenaltyConfig& config, const TwoBlockProblem& problem,
                                bool override_on);

/// SolverConfig assembled from the parsed sections.
SolverConfig build_solver_config(const RunConfig& config, const Schedule& schedule,
                                 const PenaltyParams& params);

}  // namespace ncadmm
