#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ncadmm/bench.hpp"
#include "ncadmm/calibration.hpp"
#include "ncadmm/config.hpp"
#include "ncadmm/consensus.hpp"
#include "ncadmm/diagnostics.hpp"
#include "ncadmm/errors.hpp"
#include "ncadmm/instance_io.hpp"
#include "ncadmm/sharing.hpp"
#include "ncadmm/trace.hpp"

namespace {

using namespace ncadmm;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("NCADMM_LOG");
    if (env == nullptr) return 1;
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      return 1;
    }
  }();
  return level;
}

std::mutex output_mutex;

void log_at(int level, const std::string& message) {
  if (log_level() < level) return;
  const std::lock_guard<std::mutex> lock(output_mutex);
  std::cerr << "[ncadmm] " << message << '\n';
}

void log_info(const std::string& message) { log_at(1, message); }

void log_error(const std::string& message) {
  const std::lock_guard<std::mutex> lock(output_mutex);
  std::cerr << "[ncadmm] error: " << message << '\n';
}

/// Builds the human-readable report and its flat [machine] section together
/// so the two can never drift apart.
class ReportBuilder {
 public:
  void headline(const std::string& text) {
    human_ << text << '\n' << std::string(text.size(), '=') << '\n';
  }
  void blank() { human_ << '\n'; }
  void line(const std::string& text) { human_ << text << '\n'; }

  void field(const std::string& label, const std::string& key, const std::string& value) {
    human_ << pad(label) << value << '\n';
    machine(key, value);
  }
  void field(const std::string& label, const std::string& key, double value) {
    field(label, key, format_double(value));
  }
  void field(const std::string& label, const std::string& key, long value) {
    field(label, key, std::to_string(value));
  }
  void machine(const std::string& key, const std::string& value) {
    machine_ << key << " = " << value << '\n';
  }

  std::string str() const { return human_.str() + "\n[machine]\n" + machine_.str(); }

 private:
  static std::string pad(std::string label) {
    label.resize(std::max<std::size_t>(label.size() + 2, 20), ' ');
    return label;
  }
  std::ostringstream human_;
  std::ostringstream machine_;
};

std::string join_doubles(const std::vector<double>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) os << ' ';
    os << format_double(values[i]);
  }
  return os.str();
}

void report_checks(ReportBuilder& rb, const CheckReport& checks) {
  if (checks.items.empty()) {
    rb.line("  (no checks ran)");
    return;
  }
  for (const auto& [name, counter] : checks.items) {
    std::ostringstream os;
    os << "  " << name << ": " << (counter.passed() ? "pass" : "FAIL") << " ("
       << counter.checked << " checked";
    if (counter.violations > 0)
      os << ", " << counter.violations << " violations, worst excess "
         << format_double(counter.worst) << ", first at iteration " << counter.first_fail;
    os << ")";
    rb.line(os.str());
    const std::string base = "check." + name;
    rb.machine(base + ".checked", std::to_string(counter.checked));
    rb.machine(base + ".violations", std::to_string(counter.violations));
    rb.machine(base + ".worst", format_double(counter.worst));
    rb.machine(base + ".first_fail", std::to_string(counter.first_fail));
  }
}

void append_report(CheckReport& into, const CheckReport& from) {
  for (const auto& item : from.items) into.items.push_back(item);
}

void report_penalties(ReportBuilder& rb, const PenaltyParams& params, bool auto_calibrated) {
  rb.field("penalties rho", "rho", join_doubles(params.rho));
  if (auto_calibrated) rb.field("margin", "margin", params.margin);
  rb.field("penalty source", "penalty_source", std::string(auto_calibrated ? "auto" : "explicit"));
  rb.field("override", "override", static_cast<long>(params.override_flag ? 1 : 0));
  if (params.mode == PenaltyParams::Mode::Proximal) {
    rb.field("period", "period", static_cast<long>(params.period));
    rb.field("alpha", "alpha", join_doubles(params.alpha));
    rb.field("beta", "beta", join_doubles(params.beta));
  }
}

void report_instance(ReportBuilder& rb, const InstanceFile& instance,
                     const ProblemConfig& problem) {
  std::string family;
  double f_lower = 0.0;
  if (instance.consensus) {
    family = instance.consensus->family;
    f_lower = instance.consensus->f_lower;
  } else if (instance.sharing) {
    family = instance.sharing->family;
    f_lower = instance.sharing->f_lower;
  } else {
    family = instance.two_block->family;
    f_lower = instance.two_block->f_lower;
  }
  rb.field("problem class", "class", instance.problem_class);
  rb.field("family", "family", family);
  if (!problem.file.empty())
    rb.field("instance file", "instance_file", problem.file);
  else
    rb.field("seed", "seed", static_cast<long>(problem.seed));
  rb.field("certified f lower", "f_lower", f_lower);
}

std::string stop_name(StopReason stop) {
  return stop == StopReason::Converged ? "converged" : "max-iters";
}

void emit_report(const ReportBuilder& rb, const std::optional<std::string>& path) {
  {
    const std::lock_guard<std::mutex> lock(output_mutex);
    std::cout << rb.str();
  }
  if (!path) return;
  std::ofstream out(*path);
  out << rb.str();
  out.close();
  if (!out) throw Error("cannot write report: " + *path);
}

void write_report_file(const ReportBuilder& rb, const std::string& path) {
  std::ofstream out(path);
  out << rb.str();
  out.close();
  if (!out) throw Error("cannot write report: " + path);
}

std::vector<double> consensus_lipschitz(const ConsensusProblem& problem) {
  std::vector<double> out;
  for (const auto& block : problem.blocks) out.push_back(block.lipschitz);
  return out;
}

/// Certificate preconditions: exact consensus, every index swept every
/// iteration, penalties from calibration.
bool certificate_applies(const RunConfig& config, RunMode mode) {
  return mode == RunMode::ConsensusExact && config.schedule.kind == "full" &&
         config.penalty.rho.empty();
}

/// The two-block sweep updates x1, x2, y every iteration; a partial schedule
/// would silently mean something else, so reject anything but the default.
void require_full_schedule(const RunConfig& config) {
  if (config.schedule.kind != "full")
    throw ConfigError("[schedule] two-block mode has no block schedule; use kind = full");
}

void report_certificate(ReportBuilder& rb, const RunConfig& config,
                        const ConsensusInstance& instance, const PenaltyParams& params,
                        const std::vector<TraceRow>& rows) {
  const ComplexityConstants constants =
      complexity_constants(params, consensus_lipschitz(instance.problem));
  const ConsensusState init = initial_consensus_state(instance.problem);
  const double L_initial =
      consensus_lagrangian(instance.problem, init.x0, init.xs, init.ys, params.rho);
  const CertificateResult cert =
      complexity_certificate(rows, constants, L_initial, instance.f_lower);

  rb.blank();
  rb.line("complexity certificate (min-so-far P times t versus budget)");
  rb.field("sigma1", "sigma1", constants.sigma1);
  rb.field("sigma2", "sigma2", constants.sigma2);
  rb.field("sigma3", "sigma3", constants.sigma3);
  rb.field("C", "certificate.C", constants.C);
  rb.field("budget", "certificate.budget", cert.budget);
  rb.field("worst product", "certificate.worst_product", cert.worst_product);
  rb.field("certificate", "certificate.holds", std::string(cert.holds ? "holds" : "VIOLATED"));
}

/// Runtime of one seed: solve, write the trace (and states when asked), then
/// the report. Returns the exit code; throws on hard errors.
int run_one(const RunConfig& base, std::uint64_t seed, const std::string& prefix,
            bool override_on) {
  RunConfig config = base;
  config.problem.seed = seed;
  config.schedule.seed = base.schedule.seed + seed;

  const InstanceFile instance = load_problem(config.problem);
  const RunMode mode = resolve_mode(config.algorithm, instance.problem_class);

  ReportBuilder rb;
  rb.headline("ncadmm run report");
  report_instance(rb, instance, config.problem);

  StopReason stop = StopReason::MaxIters;
  long iterations = 0;
  double final_P = 0.0;

  if (instance.consensus) {
    const ConsensusInstance inst = realize(*instance.consensus);
    const Schedule schedule = build_schedule(config.schedule, inst.problem.num_blocks(), mode);
    const PenaltyParams params =
        resolve_penalties(config.penalty, inst.problem, mode, schedule.period, override_on);
    const SolverConfig solver = build_solver_config(config, schedule, params);
    const ConsensusResult result = run_consensus(inst.problem, solver);
    stop = result.stop;
    iterations = result.iterations;
    final_P = result.final_progress;

    rb.field("algorithm", "algorithm",
             std::string(mode == RunMode::ConsensusExact ? "consensus-exact"
                                                         : "consensus-proximal"));
    rb.field("blocks", "num_blocks", static_cast<long>(inst.problem.num_blocks()));
    rb.field("dim", "dim", static_cast<long>(inst.problem.dim()));
    rb.field("schedule", "schedule", config.schedule.kind);
    report_penalties(rb, params, config.penalty.rho.empty());
    rb.blank();
    rb.field("stop", "stop", stop_name(stop));
    rb.field("iterations", "iterations", iterations);
    rb.field("final L", "l_final",
             consensus_lagrangian(inst.problem, result.state.x0, result.state.xs,
                                  result.state.ys, params.rho));
    rb.field("final P", "p_final", final_P);
    rb.field("objective at x0", "objective_final", inst.problem.objective(result.state.x0));

    const ConsensusResiduals resid = consensus_stationarity(
        inst.problem, result.state.x0, result.state.xs, result.state.ys, config.algorithm.inner);
    rb.field("residual grad+dual", "residual.grad_dual", resid.grad_dual);
    rb.field("residual x0 model", "residual.x0_model", resid.x0_model);
    rb.field("residual consensus", "residual.consensus_gap", resid.consensus_gap);
    rb.field("residual max", "residual.max", resid.max());

    rb.blank();
    rb.line("online checks");
    report_checks(rb, result.checks);
    if (certificate_applies(config, mode))
      report_certificate(rb, config, inst, params, result.record.rows);

    write_trace_csv(prefix + ".trace.csv", result.record.rows);
    if (config.output.states) write_states(prefix + ".states.txt", result.record);
  } else if (instance.sharing) {
    const SharingInstance inst = realize(*instance.sharing);
    const Schedule schedule = build_schedule(config.schedule, inst.problem.num_blocks(), mode);
    const PenaltyParams params = resolve_penalties(config.penalty, inst.problem, override_on);
    const SolverConfig solver = build_solver_config(config, schedule, params);
    const SharingResult result = run_sharing(inst.problem, solver);
    stop = result.stop;
    iterations = result.iterations;
    final_P = result.final_progress;

    rb.field("algorithm", "algorithm", std::string("sharing"));
    rb.field("blocks", "num_blocks", static_cast<long>(inst.problem.num_blocks()));
    rb.field("pool dim", "m", static_cast<long>(inst.problem.m()));
    rb.field("schedule", "schedule", config.schedule.kind);
    report_penalties(rb, params, config.penalty.rho.empty());
    rb.blank();
    rb.field("stop", "stop", stop_name(stop));
    rb.field("iterations", "iterations", iterations);
    rb.field("final L", "l_final",
             sharing_lagrangian(inst.problem, result.state.xs, result.state.x0, result.state.y,
                                params.rho_scalar()));
    rb.field("final P", "p_final", final_P);

    const SharingResiduals resid = sharing_stationarity(
        inst.problem, result.state.xs, result.state.x0, result.state.y, config.algorithm.inner);
    rb.field("residual blocks", "residual.block_worst", resid.block_worst);
    rb.field("residual coupling", "residual.coupling_grad", resid.coupling_grad);
    rb.field("residual feasibility", "residual.feasibility", resid.feasibility);
    rb.field("residual max", "residual.max", resid.max());

    rb.blank();
    rb.line("online checks");
    report_checks(rb, result.checks);

    write_trace_csv(prefix + ".trace.csv", result.record.rows);
    if (config.output.states) write_states(prefix + ".states.txt", result.record);
  } else {
    require_full_schedule(config);
    const TwoBlockInstance inst = realize(*instance.two_block);
    const PenaltyParams params = resolve_penalties(config.penalty, inst.problem, override_on);
    SolverConfig solver = build_solver_config(config, full_sweep_schedule(2), params);
    const TwoBlockResult result = run_two_block(inst.problem, solver);
    stop = result.stop;
    iterations = result.iterations;
    final_P = result.final_progress;

    rb.field("algorithm", "algorithm", std::string("two-block"));
    rb.field("n1", "n1", static_cast<long>(inst.problem.n1()));
    rb.field("m", "m", static_cast<long>(inst.problem.m()));
    report_penalties(rb, params, config.penalty.rho.empty());
    rb.blank();
    rb.field("stop", "stop", stop_name(stop));
    rb.field("iterations", "iterations", iterations);
    rb.field("final L", "l_final",
             two_block_lagrangian(inst.problem, result.state.x1, result.state.x2, result.state.y,
                                  params.rho_scalar()));
    rb.field("final P", "p_final", final_P);

    const TwoBlockResiduals resid = two_block_stationarity(
        inst.problem, result.state.x1, result.state.x2, result.state.y, config.algorithm.inner);
    rb.field("residual x1 model", "residual.x1_model", resid.x1_model);
    rb.field("residual x2 grad", "residual.x2_grad", resid.x2_grad);
    rb.field("residual feasibility", "residual.feasibility", resid.feasibility);
    rb.field("residual max", "residual.max", resid.max());

    rb.blank();
    rb.line("online checks");
    report_checks(rb, result.checks);

    write_trace_csv(prefix + ".trace.csv", result.record.rows);
    if (config.output.states) write_states(prefix + ".states.txt", result.record);
  }

  const int exit_code = stop == StopReason::Converged ? 0 : 2;
  rb.field("exit", "exit", static_cast<long>(exit_code));
  write_report_file(rb, prefix + ".report.txt");

  std::ostringstream os;
  os << "seed " << seed << ": " << stop_name(stop) << " after " << iterations
     << " iterations, P = " << format_double(final_P) << ", wrote " << prefix << ".*";
  log_info(os.str());
  return exit_code;
}

/// Later codes describe worse outcomes: error beats check violation beats
/// nonconvergence beats success.
int severity(int code) {
  switch (code) {
    case 1: return 3;
    case 3: return 2;
    case 2: return 1;
    default: return 0;
  }
}

int cmd_run(const RunConfig& config, const std::vector<std::uint64_t>& seeds, int jobs,
            const std::string& out_prefix, bool override_on) {
  const bool multi = seeds.size() > 1;
  std::vector<int> codes(seeds.size(), 0);
  std::atomic<std::size_t> cursor{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= seeds.size()) return;
      const std::uint64_t seed = seeds[i];
      const std::string prefix =
          multi ? out_prefix + ".seed" + std::to_string(seed) : out_prefix;
      try {
        codes[i] = run_one(config, seed, prefix, override_on);
      } catch (const CheckViolationError& err) {
        log_error("seed " + std::to_string(seed) + ": " + err.what());
        codes[i] = 3;
      } catch (const std::exception& err) {
        log_error("seed " + std::to_string(seed) + ": " + err.what());
        codes[i] = 1;
      }
    }
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  int exit_code = 0;
  for (int code : codes)
    if (severity(code) > severity(exit_code)) exit_code = code;
  return exit_code;
}

int cmd_calibrate(const RunConfig& base, std::optional<std::uint64_t> seed_override,
                  const std::optional<std::string>& out_prefix, bool override_on) {
  RunConfig config = base;
  if (seed_override) config.problem.seed = *seed_override;

  const InstanceFile instance = load_problem(config.problem);
  const RunMode mode = resolve_mode(config.algorithm, instance.problem_class);
  const bool auto_calibrated = config.penalty.rho.empty();

  ReportBuilder rb;
  rb.headline("ncadmm calibration report");
  report_instance(rb, instance, config.problem);

  if (instance.consensus) {
    const ConsensusInstance inst = realize(*instance.consensus);
    const Schedule schedule = build_schedule(config.schedule, inst.problem.num_blocks(), mode);
    const PenaltyParams params =
        resolve_penalties(config.penalty, inst.problem, mode, schedule.period, override_on);
    const std::vector<double> lipschitz = consensus_lipschitz(inst.problem);
    std::vector<bool> convex;
    for (const auto& block : inst.problem.blocks) convex.push_back(block.is_convex);

    rb.field("algorithm", "algorithm",
             std::string(mode == RunMode::ConsensusExact ? "consensus-exact"
                                                         : "consensus-proximal"));
    rb.blank();
    for (std::size_t k = 0; k < lipschitz.size(); ++k) {
      std::ostringstream os;
      os << "  block " << k + 1 << ": L = " << format_double(lipschitz[k])
         << (convex[k] ? " (convex)" : "") << ", rho = " << format_double(params.rho[k])
         << ", gamma = " << format_double(params.gamma[k]);
      if (auto_calibrated)
        os << ", threshold = " << format_double(params.rho[k] / params.margin);
      rb.line(os.str());
      rb.machine("block." + std::to_string(k + 1) + ".lipschitz", format_double(lipschitz[k]));
      rb.machine("block." + std::to_string(k + 1) + ".rho", format_double(params.rho[k]));
      rb.machine("block." + std::to_string(k + 1) + ".gamma", format_double(params.gamma[k]));
    }
    rb.blank();
    rb.field("gamma0", "gamma0", params.gamma0);
    report_penalties(rb, params, auto_calibrated);

    const std::vector<std::string> violations =
        calibration_violations(params, lipschitz, convex);
    rb.field("violations", "violations", static_cast<long>(violations.size()));
    for (const std::string& v : violations) rb.line("  violated: " + v);
    if (!violations.empty() && !override_on)
      rb.line("  (running these penalties needs --override-penalty)");

    if (mode == RunMode::ConsensusExact && violations.empty()) {
      const ComplexityConstants constants = complexity_constants(params, lipschitz);
      rb.blank();
      rb.field("sigma1", "sigma1", constants.sigma1);
      rb.field("sigma2", "sigma2", constants.sigma2);
      rb.field("sigma3", "sigma3", constants.sigma3);
      rb.field("C", "C", constants.C);
    }
  } else if (instance.sharing) {
    const SharingInstance inst = realize(*instance.sharing);
    const PenaltyParams params = resolve_penalties(config.penalty, inst.problem, override_on);

    rb.field("algorithm", "algorithm", std::string("sharing"));
    rb.field("coupling L", "coupling_lipschitz", inst.problem.coupling.lipschitz);
    rb.blank();
    for (std::size_t k = 0; k < inst.problem.blocks.size(); ++k) {
      const auto& block = inst.problem.blocks[k];
      std::ostringstream os;
      os << "  block " << k + 1 << ": lambda_min(A'A) = "
         << format_double(block.lambda_min_AtA) << ", gamma = " << format_double(params.gamma[k]);
      rb.line(os.str());
      rb.machine("block." + std::to_string(k + 1) + ".lambda_min", format_double(block.lambda_min_AtA));
      rb.machine("block." + std::to_string(k + 1) + ".gamma", format_double(params.gamma[k]));
    }
    rb.blank();
    rb.field("gamma0", "gamma0", params.gamma0);
    report_penalties(rb, params, auto_calibrated);

    const std::vector<std::string> violations = calibration_violations(params, inst.problem);
    rb.field("violations", "violations", static_cast<long>(violations.size()));
    for (const std::string& v : violations) rb.line("  violated: " + v);
    if (!violations.empty() && !override_on)
      rb.line("  (running these penalties needs --override-penalty)");
  } else {
    require_full_schedule(config);
    const TwoBlockInstance inst = realize(*instance.two_block);
    const PenaltyParams params = resolve_penalties(config.penalty, inst.problem, override_on);

    rb.field("algorithm", "algorithm", std::string("two-block"));
    rb.field("L_g", "g_lipschitz", inst.problem.g.lipschitz);
    rb.field("lambda_min(AA')", "lambda_min_AAt", inst.problem.lambda_min_AAt);
    rb.field("x2 modulus", "gamma0", params.gamma0);
    report_penalties(rb, params, auto_calibrated);

    const std::vector<std::string> violations = calibration_violations(params, inst.problem);
    rb.field("violations", "violations", static_cast<long>(violations.size()));
    for (const std::string& v : violations) rb.line("  violated: " + v);
    if (!violations.empty() && !override_on)
      rb.line("  (running these penalties needs --override-penalty)");
  }

  emit_report(rb, out_prefix ? std::optional<std::string>(*out_prefix + ".calibration.txt")
                             : std::nullopt);
  return 0;
}

int cmd_gen(const RunConfig& base, std::optional<std::uint64_t> seed_override,
            const std::string& out_prefix) {
  RunConfig config = base;
  if (seed_override) config.problem.seed = *seed_override;

  const InstanceFile instance = load_problem(config.problem);
  const std::string path = out_prefix + ".instance.txt";
  if (instance.consensus)
    write_instance(path, *instance.consensus);
  else if (instance.sharing)
    write_instance(path, *instance.sharing);
  else
    write_instance(path, *instance.two_block);

  ReportBuilder rb;
  rb.headline("ncadmm instance");
  report_instance(rb, instance, config.problem);
  if (instance.consensus) {
    const ConsensusInstance inst = realize(*instance.consensus);
    rb.field("f best (estimate)", "f_best_estimate",
             estimate_best_objective(inst.problem, 200, config.problem.seed + 1));
  }
  rb.field("written to", "path", path);
  emit_report(rb, std::nullopt);
  return 0;
}

int cmd_check(const RunConfig& base, std::optional<std::uint64_t> seed_override,
              const std::string& in_prefix, const std::optional<std::string>& out_prefix,
              bool override_on) {
  RunConfig config = base;
  if (seed_override) config.problem.seed = *seed_override;

  const std::string trace_path = in_prefix + ".trace.csv";
  const std::string states_path = in_prefix + ".states.txt";
  const std::vector<TraceRow> rows = read_trace_csv(trace_path);

  ReportBuilder rb;
  rb.headline("ncadmm check report");
  rb.field("trace", "trace", trace_path);
  rb.field("rows", "rows", static_cast<long>(rows.size()));

  if (rows.empty()) {
    rb.line("empty trace; nothing to check");
    rb.field("result", "result", std::string("pass"));
    emit_report(rb, out_prefix ? std::optional<std::string>(*out_prefix + ".check.txt")
                               : std::nullopt);
    return 0;
  }

  RunRecord record = read_states(states_path);
  record.rows = rows;
  record.has_snapshots = true;
  record.inner_tol = config.algorithm.inner.tol;
  record.override_flag = override_on;

  const InstanceFile instance = load_problem(config.problem);
  const RunMode mode = resolve_mode(config.algorithm, instance.problem_class);
  const double tol = check_tolerance(config.algorithm.inner);

  const auto expect_kind = [&](AlgorithmKind kind) {
    if (record.algorithm != kind)
      throw Error("states file records algorithm '" + algorithm_name(record.algorithm) +
                  "' but the config resolves to '" + algorithm_name(kind) + "'");
  };

  CheckReport merged;
  if (instance.consensus) {
    expect_kind(mode == RunMode::ConsensusExact ? AlgorithmKind::ConsensusExact
                                                : AlgorithmKind::ConsensusProximal);
    const ConsensusInstance inst = realize(*instance.consensus);
    const Schedule schedule = build_schedule(config.schedule, inst.problem.num_blocks(), mode);
    const PenaltyParams params =
        resolve_penalties(config.penalty, inst.problem, mode, schedule.period, override_on);
    const std::vector<double> lipschitz = consensus_lipschitz(inst.problem);

    merged = check_descent(record, inst.problem, params, tol);
    append_report(merged, check_lower_bound(record, inst.problem, tol));
    append_report(merged, check_dual_bound(record, lipschitz, tol));
    append_report(merged, check_identities(record, inst.problem, params, tol));
    if (certificate_applies(config, mode)) report_certificate(rb, config, inst, params, rows);
  } else if (instance.sharing) {
    expect_kind(AlgorithmKind::Sharing);
    const SharingInstance inst = realize(*instance.sharing);
    const PenaltyParams params = resolve_penalties(config.penalty, inst.problem, override_on);

    merged = check_descent(record, inst.problem, params, tol);
    append_report(merged, check_lower_bound(record, inst.problem, params, tol));
    append_report(merged, check_dual_bound(record, {inst.problem.coupling.lipschitz}, tol));
    append_report(merged, check_identities(record, inst.problem, params, tol));
  } else {
    expect_kind(AlgorithmKind::TwoBlock);
    const TwoBlockInstance inst = realize(*instance.two_block);
    const PenaltyParams params = resolve_penalties(config.penalty, inst.problem, override_on);
    const double dual_gain =
        inst.problem.g.lipschitz / std::sqrt(inst.problem.lambda_min_AAt);

    merged = check_descent(record, inst.problem, params, tol);
    append_report(merged, check_dual_bound(record, {dual_gain}, tol));
  }

  rb.blank();
  rb.line("offline checks");
  report_checks(rb, merged);
  const bool passed = merged.all_passed();
  rb.field("result", "result", std::string(passed ? "pass" : "FAIL"));
  emit_report(rb, out_prefix ? std::optional<std::string>(*out_prefix + ".check.txt")
                             : std::nullopt);
  return passed ? 0 : 3;
}

std::vector<std::uint64_t> parse_seed_range(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("--seeds wants A:B (inclusive), got '" + text + "'");
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  try {
    lo = std::stoull(text.substr(0, colon));
    hi = std::stoull(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("--seeds wants A:B (inclusive), got '" + text + "'");
  }
  if (hi < lo) throw ConfigError("--seeds range is empty: " + text);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = lo; s <= hi; ++s) {
    seeds.push_back(s);
    if (s == hi) break;
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonconvex ADMM experiment driver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_prefix = "ncadmm";
  std::string in_prefix;
  std::string seeds_range;
  std::uint64_t seed_value = 0;
  int jobs = 1;
  bool override_penalty = false;

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "print penalties and certified constants for a config");
  CLI::App* run = app.add_subcommand("run", "solve and write trace and report files");
  CLI::App* check = app.add_subcommand("check", "re-run convergence checks on a recorded run");
  CLI::App* gen = app.add_subcommand("gen", "write the generated instance to a file");

  for (CLI::App* cmd : {calibrate, run, check, gen}) {
    cmd->add_option("--config", config_path, "run configuration file")->required();
    cmd->add_option("--seed", seed_value, "generator seed (overrides [problem] seed)");
  }
  for (CLI::App* cmd : {calibrate, run, check})
    cmd->add_flag("--override-penalty", override_penalty,
                  "accept penalties that violate the calibration conditions");
  for (CLI::App* cmd : {calibrate, run, check, gen})
    cmd->add_option("--out", out_prefix, "output path prefix");

  CLI::Option* seeds_opt =
      run->add_option("--seeds", seeds_range, "inclusive seed range A:B, one run per seed");
  seeds_opt->excludes(run->get_option("--seed"));
  run->add_option("--jobs", jobs, "worker threads for multi-seed runs")
      ->check(CLI::PositiveNumber);
  check->add_option("--in", in_prefix, "path prefix of the recorded run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig config = parse_config_file(config_path);
    CLI::App* active = app.get_subcommands().front();
    std::optional<std::uint64_t> seed_override;
    if (active->count("--seed") > 0) seed_override = seed_value;

    if (active == run) {
      std::vector<std::uint64_t> seeds;
      if (run->count("--seeds") > 0)
        seeds = parse_seed_range(seeds_range);
      else
        seeds = {seed_override.value_or(config.problem.seed)};
      return cmd_run(config, seeds, jobs, out_prefix, override_penalty);
    }
    if (active == calibrate) {
      std::optional<std::string> out;
      if (calibrate->count("--out") > 0) out = out_prefix;
      return cmd_calibrate(config, seed_override, out, override_penalty);
    }
    if (active == check) {
      std::optional<std::string> out;
      if (check->count("--out") > 0) out = out_prefix;
      return cmd_check(config, seed_override, in_prefix, out, override_penalty);
    }
    return cmd_gen(config, seed_override, out_prefix);
  } catch (const CheckViolationError& err) {
    log_error(std::string(err.what()) + " (iteration " + std::to_string(err.iteration) + ")");
    return 3;
  } catch (const std::exception& err) {
    log_error(err.what());
    return 1;
  }
}
