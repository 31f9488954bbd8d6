#pragma once

#include <cstdint>
#include <vector>

#include "ncadmm/rng.hpp"

namespace ncadmm {

/// Block-selection rule for flexible sweeps. Index 0 is the shared variable;
/// indices 1..K are the blocks. Proximal mode sets include_x0 = false, since
/// there the shared variable updates unconditionally every iteration.
struct Schedule {
  enum class Kind { FullSweep, Cyclic, Randomized };

  Kind kind = Kind::FullSweep;
  int num_blocks = 0;  ///< K
  bool include_x0 = true;

  int period = 1;                            ///< Cyclic: T
  std::vector<std::vector<int>> partition;   ///< Cyclic: T cells covering all indices
  std::vector<double> probabilities;         ///< Randomized: per-index inclusion
  double p_min = 0.0;                        ///< Randomized: smallest probability
  std::uint64_t seed = 0;                    ///< Randomized: draw seed
};

Schedule full_sweep_schedule(int num_blocks, bool include_x0 = true);

/// Round-robin partition: cell j holds the indices congruent to j mod period.
Schedule cyclic_schedule(int num_blocks, int period, bool include_x0 = true);

/// Cyclic rule with an explicit partition; cells must disjointly cover the
/// index universe.
Schedule cyclic_schedule(int num_blocks, std::vector<std::vector<int>> partition,
                         bool include_x0 = true);

/// Independent Bernoulli inclusion per index; empty draws are redrawn.
/// Every probability must be positive (and is clipped to at most 1).
Schedule randomized_schedule(int num_blocks, std::vector<double> probabilities,
                             std::uint64_t seed, bool include_x0 = true);
Schedule randomized_schedule(int num_blocks, double probability, std::uint64_t seed,
                             bool include_x0 = true);

/// The index set for iteration t+1 given the completed iteration count t.
/// t = 0 always returns the full universe (the first sweep touches
/// everything); rng carries the randomized rule's state across calls.
std::vector<int> next_blocks(const Schedule& schedule, long t, Rng& rng);

/// Most recent iteration r <= t whose fired set contained index k, with
/// history[r-1] holding iteration r's set. Throws Error if k never fired.
long last_update_index(const std::vector<std::vector<int>>& history, int k, long t);

/// True when every window of `period` consecutive fired sets covers the
/// schedule's whole index universe.
bool verify_essential_cyclicity(const Schedule& schedule,
                                const std::vector<std::vector<int>>& history, int period);

}  // namespace ncadmm
