#include "ncadmm/schedule.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "ncadmm/errors.hpp"

namespace ncadmm {

namespace {

std::vector<int> universe(const Schedule& schedule) {
  std::vector<int> all;
  if (schedule.include_x0) all.push_back(0);
  for (int k = 1; k <= schedule.num_blocks; ++k) all.push_back(k);
  return all;
}

void require_blocks(int num_blocks) {
  if (num_blocks < 1) throw DimensionError("schedule: needs at least one block");
}

}  // namespace

Schedule full_sweep_schedule(int num_blocks, bool include_x0) {
  require_blocks(num_blocks);
  Schedule s;
  s.kind = Schedule::Kind::FullSweep;
  s.num_blocks = num_blocks;
  s.include_x0 = include_x0;
  s.period = 1;
  return s;
}

Schedule cyclic_schedule(int num_blocks, int period, bool include_x0) {
  require_blocks(num_blocks);
  if (period < 1) throw Error("cyclic_schedule: period must be at least 1");
  Schedule s;
  s.kind = Schedule::Kind::Cyclic;
  s.num_blocks = num_blocks;
  s.include_x0 = include_x0;
  s.period = period;
  s.partition.assign(period, {});
  const std::vector<int> all = universe(s);
  for (std::size_t i = 0; i < all.size(); ++i)
    s.partition[i % static_cast<std::size_t>(period)].push_back(all[i]);
  // A period longer than the index count leaves empty cells; they are legal
  // (an iteration may fire nothing) but every window still covers via the
  // nonempty cells.
  return s;
}

Schedule cyclic_schedule(int num_blocks, std::vector<std::vector<int>> partition,
                         bool include_x0) {
  require_blocks(num_blocks);
  if (partition.empty()) throw Error("cyclic_schedule: empty partition");
  Schedule s;
  s.kind = Schedule::Kind::Cyclic;
  s.num_blocks = num_blocks;
  s.include_x0 = include_x0;
  s.period = static_cast<int>(partition.size());
  s.partition = std::move(partition);

  std::set<int> seen;
  for (auto& cell : s.partition) {
    std::sort(cell.begin(), cell.end());
    for (int idx : cell) {
      if (idx < (include_x0 ? 0 : 1) || idx > num_blocks)
        throw Error("cyclic_schedule: index " + std::to_string(idx) + " outside the universe");
      if (!seen.insert(idx).second)
        throw Error("cyclic_schedule: index " + std::to_string(idx) + " appears twice");
    }
  }
  if (seen.size() != universe(s).size())
    throw Error("cyclic_schedule: partition does not cover every index");
  return s;
}

Schedule randomized_schedule(int num_blocks, std::vector<double> probabilities,
                             std::uint64_t seed, bool include_x0) {
  require_blocks(num_blocks);
  Schedule s;
  s.kind = Schedule::Kind::Randomized;
  s.num_blocks = num_blocks;
  s.include_x0 = include_x0;
  s.seed = seed;
  const std::size_t expected = universe(s).size();
  if (probabilities.size() != expected)
    throw Error("randomized_schedule: needs one probability per index");
  s.p_min = 1.0;
  for (double& p : probabilities) {
    if (!(p > 0.0)) throw Error("randomized_schedule: probabilities must be positive");
    p = std::min(p, 1.0);
    s.p_min = std::min(s.p_min, p);
  }
  s.probabilities = std::move(probabilities);
  return s;
}

Schedule randomized_schedule(int num_blocks, double probability, std::uint64_t seed,
                             bool include_x0) {
  require_blocks(num_blocks);
  const std::size_t count = static_cast<std::size_t>(num_blocks) + (include_x0 ? 1 : 0);
  return randomized_schedule(num_blocks, std::vector<double>(count, probability), seed,
                             include_x0);
}

std::vector<int> next_blocks(const Schedule& schedule, long t, Rng& rng) {
  if (t < 0) throw Error("next_blocks: negative iteration count");
  const std::vector<int> all = universe(schedule);
  if (t == 0) return all;

  switch (schedule.kind) {
    case Schedule::Kind::FullSweep:
      return all;
    case Schedule::Kind::Cyclic:
      return schedule.partition[static_cast<std::size_t>(t % schedule.period)];
    case Schedule::Kind::Randomized: {
      std::vector<int> fired;
      // Redraw until nonempty; each index keeps inclusion probability >= p_k
      // conditioned on the set being nonempty.
      do {
        fired.clear();
        for (std::size_t i = 0; i < all.size(); ++i)
          if (rng.uniform01() < schedule.probabilities[i]) fired.push_back(all[i]);
      } while (fired.empty());
      return fired;
    }
  }
  return all;
}

long last_update_index(const std::vector<std::vector<int>>& history, int k, long t) {
  if (t < 1 || t > static_cast<long>(history.size()))
    throw Error("last_update_index: iteration outside recorded history");
  for (long r = t; r >= 1; --r) {
    const auto& fired = history[static_cast<std::size_t>(r - 1)];
    if (std::find(fired.begin(), fired.end(), k) != fired.end()) return r;
  }
  throw Error("last_update_index: index " + std::to_string(k) + " never fired by iteration " +
              std::to_string(t));
}

bool verify_essential_cyclicity(const Schedule& schedule,
                                const std::vector<std::vector<int>>& history, int period) {
  if (period < 1) throw Error("verify_essential_cyclicity: period must be at least 1");
  const std::vector<int> all = universe(schedule);
  if (static_cast<long>(history.size()) < period) return false;
  for (std::size_t start = 0; start + static_cast<std::size_t>(period) <= history.size();
       ++start) {
    std::set<int> covered;
    for (std::size_t i = start; i < start + static_cast<std::size_t>(period); ++i)
      covered.insert(history[i].begin(), history[i].end());
    for (int idx : all)
      if (covered.count(idx) == 0) return false;
  }
  return true;
}

}  // namespace ncadmm
