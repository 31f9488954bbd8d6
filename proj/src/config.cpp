#include "ncadmm/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ncadmm/bench.hpp"
#include "ncadmm/errors.hpp"

namespace ncadmm {

namespace {

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

/// Position inside the file being parsed, for error messages.
struct Cursor {
  std::string origin;
  int line = 0;

  [[noreturn]] void fail(const std::string& message) const {
    std::ostringstream os;
    os << origin << ":" << line << ": " << message;
    throw ConfigError(os.str());
  }
};

long parse_long(const std::string& value, const Cursor& at) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(value, &used);
  } catch (const std::exception&) {
    at.fail("expected an integer, got '" + value + "'");
  }
  if (used != value.size()) at.fail("expected an integer, got '" + value + "'");
  return out;
}

int parse_int(const std::string& value, const Cursor& at) {
  return static_cast<int>(parse_long(value, at));
}

double parse_real(const std::string& value, const Cursor& at) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    at.fail("expected a number, got '" + value + "'");
  }
  if (used != value.size()) at.fail("expected a number, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& value, const Cursor& at) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  at.fail("expected a boolean (0/1/true/false), got '" + value + "'");
}

std::vector<std::string> split_words(const std::string& value) {
  std::istringstream in(value);
  std::vector<std::string> out;
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

std::vector<double> parse_reals(const std::string& value, const Cursor& at) {
  std::vector<double> out;
  for (const std::string& word : split_words(value)) out.push_back(parse_real(word, at));
  if (out.empty()) at.fail("expected at least one number");
  return out;
}

std::vector<std::vector<int>> parse_partition(const std::string& value, const Cursor& at) {
  std::vector<std::vector<int>> cells;
  std::istringstream in(value);
  std::string cell;
  while (std::getline(in, cell, ';')) {
    std::vector<int> indices;
    for (const std::string& word : split_words(cell)) indices.push_back(parse_int(word, at));
    cells.push_back(std::move(indices));
  }
  if (cells.empty()) at.fail("partition needs at least one cell");
  return cells;
}

void apply_problem(ProblemConfig& out, const std::string& key, const std::string& value,
                   const Cursor& at) {
  if (key == "family")
    out.family = value;
  else if (key == "file")
    out.file = value;
  else if (key == "seed")
    out.seed = static_cast<std::uint64_t>(parse_long(value, at));
  else if (key == "num_blocks")
    out.num_blocks = parse_int(value, at);
  else if (key == "dim")
    out.dim = parse_int(value, at);
  else if (key == "terms")
    out.terms = parse_int(value, at);
  else if (key == "block_dim")
    out.block_dim = parse_int(value, at);
  else if (key == "m")
    out.m = parse_int(value, at);
  else if (key == "n1")
    out.n1 = parse_int(value, at);
  else if (key == "num_prox_blocks")
    out.num_prox_blocks = parse_int(value, at);
  else if (key == "nonconvexity")
    out.nonconvexity = parse_real(value, at);
  else if (key == "l1_weight")
    out.l1_weight = parse_real(value, at);
  else if (key == "box_radius")
    out.box_radius = parse_real(value, at);
  else if (key == "ripple")
    out.ripple = parse_real(value, at);
  else if (key == "nonconvex_coupling")
    out.nonconvex_coupling = parse_bool(value, at);
  else
    at.fail("unknown [problem] key '" + key + "'");
}

void apply_algorithm(AlgorithmConfig& out, const std::string& key, const std::string& value,
                     const Cursor& at) {
  if (key == "mode") {
    if (value != "consensus-exact" && value != "consensus-proximal" && value != "sharing" &&
        value != "two-block")
      at.fail("unknown algorithm mode '" + value + "'");
    out.mode = value;
  } else if (key == "max_iters") {
    out.max_iters = parse_long(value, at);
  } else if (key == "stop_tol") {
    out.stop_tol = parse_real(value, at);
  } else if (key == "inner_tol") {
    out.inner.tol = parse_real(value, at);
  } else if (key == "inner_max_iters") {
    out.inner.max_iters = parse_long(value, at);
  } else if (key == "check_level") {
    if (value == "off")
      out.check_level = CheckLevel::Off;
    else if (value == "cheap")
      out.check_level = CheckLevel::Cheap;
    else if (value == "full")
      out.check_level = CheckLevel::Full;
    else
      at.fail("unknown check level '" + value + "' (off, cheap, full)");
  } else if (key == "record_snapshots") {
    out.record_snapshots = parse_bool(value, at);
  } else if (key == "timing") {
    out.timing = parse_bool(value, at);
  } else {
    at.fail("unknown [algorithm] key '" + key + "'");
  }
}

void apply_schedule(ScheduleConfig& out, const std::string& key, const std::string& value,
                    const Cursor& at) {
  if (key == "kind") {
    if (value != "full" && value != "cyclic" && value != "randomized")
      at.fail("unknown schedule kind '" + value + "' (full, cyclic, randomized)");
    out.kind = value;
  } else if (key == "period") {
    out.period = parse_int(value, at);
  } else if (key == "partition") {
    out.partition = parse_partition(value, at);
  } else if (key == "probability") {
    out.probability = parse_real(value, at);
  } else if (key == "probabilities") {
    out.probabilities = parse_reals(value, at);
  } else if (key == "include_x0") {
    out.include_x0 = parse_bool(value, at);
  } else if (key == "seed") {
    out.seed = static_cast<std::uint64_t>(parse_long(value, at));
  } else {
    at.fail("unknown [schedule] key '" + key + "'");
  }
}

void apply_penalty(PenaltyConfig& out, const std::string& key, const std::string& value,
                   const Cursor& at) {
  if (key == "margin")
    out.margin = parse_real(value, at);
  else if (key == "rho")
    out.rho = parse_reals(value, at);
  else
    at.fail("unknown [penalty] key '" + key + "'");
}

void apply_output(OutputConfig& out, const std::string& key, const std::string& value,
                  const Cursor& at) {
  if (key == "states")
    out.states = parse_bool(value, at);
  else
    at.fail("unknown [output] key '" + key + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig config;
  Cursor at{origin, 0};
  std::istringstream in(text);
  std::string raw;
  std::string section;
  while (std::getline(in, raw)) {
    ++at.line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "algorithm" && section != "schedule" &&
          section != "penalty" && section != "output")
        at.fail("unknown section [" + section + "]");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");
    if (section.empty()) at.fail("key '" + key + "' appears before any [section]");

    if (section == "problem")
      apply_problem(config.problem, key, value, at);
    else if (section == "algorithm")
      apply_algorithm(config.algorithm, key, value, at);
    else if (section == "schedule")
      apply_schedule(config.schedule, key, value, at);
    else if (section == "penalty")
      apply_penalty(config.penalty, key, value, at);
    else
      apply_output(config.output, key, value, at);
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

namespace {

[[noreturn]] void reject_override(const std::string& family, const char* key) {
  throw ConfigError(std::string("[problem] ") + key + " does not apply to family '" + family +
                    "'");
}

InstanceFile from_family(const ProblemConfig& config) {
  const std::string& family = config.family;
  const auto forbid = [&](const char* key, bool set) {
    if (set) reject_override(family, key);
  };

  InstanceFile file;
  if (family == "quadratic" || family == "quadratic-sharp") {
    forbid("terms", config.terms.has_value());
    forbid("block_dim", config.block_dim.has_value());
    forbid("m", config.m.has_value());
    forbid("n1", config.n1.has_value());
    forbid("num_prox_blocks", config.num_prox_blocks.has_value());
    forbid("ripple", config.ripple.has_value());
    forbid("nonconvex_coupling", config.nonconvex_coupling.has_value());
    QuadraticFamilyOptions options;
    options.sharp = family == "quadratic-sharp";
    if (config.num_blocks) options.num_blocks = *config.num_blocks;
    if (config.dim) options.dim = *config.dim;
    if (config.nonconvexity) options.nonconvexity = *config.nonconvexity;
    if (config.l1_weight) options.l1_weight = *config.l1_weight;
    if (config.box_radius) options.box_radius = *config.box_radius;
    file.problem_class = "consensus";
    file.consensus = quadratic_consensus_desc(options, config.seed);
  } else if (family == "sigmoid") {
    forbid("nonconvexity", config.nonconvexity.has_value());
    forbid("l1_weight", config.l1_weight.has_value());
    forbid("block_dim", config.block_dim.has_value());
    forbid("m", config.m.has_value());
    forbid("n1", config.n1.has_value());
    forbid("num_prox_blocks", config.num_prox_blocks.has_value());
    forbid("ripple", config.ripple.has_value());
    forbid("nonconvex_coupling", config.nonconvex_coupling.has_value());
    SigmoidFamilyOptions options;
    if (config.num_blocks) options.num_blocks = *config.num_blocks;
    if (config.dim) options.dim = *config.dim;
    if (config.terms) options.terms = *config.terms;
    if (config.box_radius) options.box_radius = *config.box_radius;
    file.problem_class = "consensus";
    file.consensus = sigmoid_consensus_desc(options, config.seed);
  } else if (is_sharing_family(family)) {
    forbid("dim", config.dim.has_value());
    forbid("terms", config.terms.has_value());
    forbid("n1", config.n1.has_value());
    SharingFamilyOptions options;
    if (family == "sharing-cos") options.nonconvex_coupling = true;
    if (family == "sharing-mixed") options.num_prox_blocks = 1;
    if (config.num_blocks) options.num_blocks = *config.num_blocks;
    if (config.block_dim) options.block_dim = *config.block_dim;
    if (config.m) options.m = *config.m;
    if (config.nonconvexity) options.nonconvexity = *config.nonconvexity;
    if (config.box_radius) options.box_radius = *config.box_radius;
    if (config.num_prox_blocks) options.num_prox_blocks = *config.num_prox_blocks;
    if (config.l1_weight) options.l1_weight = *config.l1_weight;
    if (config.nonconvex_coupling) options.nonconvex_coupling = *config.nonconvex_coupling;
    if (config.ripple) options.ripple = *config.ripple;
    file.problem_class = "sharing";
    file.sharing = sharing_desc(options, config.seed);
  } else if (family == "two-block") {
    forbid("num_blocks", config.num_blocks.has_value());
    forbid("dim", config.dim.has_value());
    forbid("terms", config.terms.has_value());
    forbid("block_dim", config.block_dim.has_value());
    forbid("num_prox_blocks", config.num_prox_blocks.has_value());
    forbid("ripple", config.ripple.has_value());
    forbid("nonconvex_coupling", config.nonconvex_coupling.has_value());
    TwoBlockFamilyOptions options;
    if (config.n1) options.n1 = *config.n1;
    if (config.m) options.m = *config.m;
    if (config.l1_weight) options.l1_weight = *config.l1_weight;
    if (config.box_radius) options.box_radius = *config.box_radius;
    if (config.nonconvexity) options.nonconvexity = *config.nonconvexity;
    file.problem_class = "two-block";
    file.two_block = two_block_desc(options, config.seed);
  } else {
    throw ConfigError("[problem] unknown family '" + family + "'");
  }
  return file;
}

bool any_shape_override(const ProblemConfig& config) {
  return config.num_blocks || config.dim || config.terms || config.block_dim || config.m ||
         config.n1 || config.num_prox_blocks || config.nonconvexity || config.l1_weight ||
         config.box_radius || config.ripple || config.nonconvex_coupling;
}

}  // namespace

InstanceFile load_problem(const ProblemConfig& config) {
  const bool has_family = !config.family.empty();
  const bool has_file = !config.file.empty();
  if (has_family == has_file)
    throw ConfigError("[problem] needs exactly one of family= or file=");
  if (has_file) {
    if (any_shape_override(config))
      throw ConfigError("[problem] shape overrides do not apply to file= instances");
    return read_instance(config.file);
  }
  return from_family(config);
}

RunMode resolve_mode(const AlgorithmConfig& config, const std::string& problem_class) {
  std::string mode = config.mode;
  if (mode.empty()) {
    if (problem_class == "consensus")
      mode = "consensus-exact";
    else if (problem_class == "sharing")
      mode = "sharing";
    else if (problem_class == "two-block")
      mode = "two-block";
    else
      throw ConfigError("unknown problem class '" + problem_class + "'");
  }

  const auto require_class = [&](const char* wanted) {
    if (problem_class != wanted)
      throw ConfigError("algorithm mode '" + mode + "' does not fit a " + problem_class +
                        " instance");
  };
  if (mode == "consensus-exact") {
    require_class("consensus");
    return RunMode::ConsensusExact;
  }
  if (mode == "consensus-proximal") {
    require_class("consensus");
    return RunMode::ConsensusProximal;
  }
  if (mode == "sharing") {
    require_class("sharing");
    return RunMode::Sharing;
  }
  if (mode == "two-block") {
    require_class("two-block");
    return RunMode::TwoBlock;
  }
  throw ConfigError("unknown algorithm mode '" + mode + "'");
}

Schedule build_schedule(const ScheduleConfig& config, int num_blocks, RunMode mode) {
  const bool include_x0 = config.include_x0.value_or(mode != RunMode::ConsensusProximal);
  if (mode == RunMode::ConsensusProximal && include_x0)
    throw ConfigError("[schedule] include_x0 must be 0 in proximal mode");
  if (config.kind == "full") return full_sweep_schedule(num_blocks, include_x0);
  if (config.kind == "cyclic") {
    if (!config.partition.empty()) return cyclic_schedule(num_blocks, config.partition, include_x0);
    return cyclic_schedule(num_blocks, config.period, include_x0);
  }
  if (!config.probabilities.empty())
    return randomized_schedule(num_blocks, config.probabilities, config.seed, include_x0);
  return randomized_schedule(num_blocks, config.probability, config.seed, include_x0);
}

PenaltyParams resolve_penalties(const PenaltyConfig& config, const ConsensusProblem& problem,
                                RunMode mode, int period, bool override_on) {
  std::vector<double> lipschitz;
  std::vector<bool> convex;
  for (const auto& block : problem.blocks) {
    lipschitz.push_back(block.lipschitz);
    convex.push_back(block.is_convex);
  }

  PenaltyParams params;
  if (config.rho.empty()) {
    params = mode == RunMode::ConsensusProximal
                 ? calibrate_proximal(lipschitz, period, config.margin)
                 : calibrate_consensus(lipschitz, convex, config.margin);
  } else {
    std::vector<double> rho = config.rho;
    if (rho.size() == 1) rho.assign(lipschitz.size(), rho.front());
    if (rho.size() != lipschitz.size())
      throw ConfigError("[penalty] rho needs one value or one per block");
    params = mode == RunMode::ConsensusProximal
                 ? penalties_from_rho_proximal(rho, lipschitz, period)
                 : penalties_from_rho_consensus(rho, lipschitz, convex);
  }
  params.override_flag = override_on;
  return params;
}

PenaltyParams resolve_penalties(const PenaltyConfig& config, const SharingProblem& problem,
                                bool override_on) {
  PenaltyParams params;
  if (config.rho.empty())
    params = calibrate_sharing(problem, config.margin);
  else if (config.rho.size() == 1)
    params = penalties_from_rho_sharing(config.rho.front(), problem);
  else
    throw ConfigError("[penalty] rho must be a single value for sharing runs");
  params.override_flag = override_on;
  return params;
}

PenaltyParams resolve_penalties(const PenaltyConfig& config, const TwoBlockProblem& problem,
                                bool override_on) {
  PenaltyParams params;
  if (config.rho.empty())
    params = calibrate_two_block(problem, config.margin);
  else if (config.rho.size() == 1)
    params = penalties_from_rho_two_block(config.rho.front(), problem);
  else
    throw ConfigError("[penalty] rho must be a single value for two-block runs");
  params.override_flag = override_on;
  return params;
}

SolverConfig build_solver_config(const RunConfig& config, const Schedule& schedule,
                                 const PenaltyParams& params) {
  SolverConfig out;
  out.params = params;
  out.schedule = schedule;
  out.max_iters = config.algorithm.max_iters;
  out.stop_tol = config.algorithm.stop_tol;
  out.inner = config.algorithm.inner;
  out.check_level = config.algorithm.check_level;
  out.record_snapshots = config.algorithm.record_snapshots;
  out.timing = config.algorithm.timing;
  return out;
}

}  // namespace ncadmm
