#include "ncadmm/trace.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ncadmm/errors.hpp"

namespace ncadmm {

namespace {

constexpr const char* kTraceHeader =
    "iter,L_value,feas_gap,P_value,block_step_sq,x0_step_sq,dual_step_sq,"
    "fired_mask,descent_margin,wall_ms";

void write_vector(std::ostream& os, const char* tag, const Vector& v) {
  os << tag;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << format_double(v(i));
  os << '\n';
}

Vector parse_vector(std::istringstream& is, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(is >> v(i))) throw Error("states file: truncated vector");
  return v;
}

}  // namespace

std::string algorithm_name(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::ConsensusExact:
      return "consensus-exact";
    case AlgorithmKind::ConsensusProximal:
      return "consensus-proximal";
    case AlgorithmKind::Sharing:
      return "sharing";
    case AlgorithmKind::TwoBlock:
      return "two-block";
  }
  return "consensus-exact";
}

AlgorithmKind algorithm_from_name(const std::string& name) {
  if (name == "consensus-exact") return AlgorithmKind::ConsensusExact;
  if (name == "consensus-proximal") return AlgorithmKind::ConsensusProximal;
  if (name == "sharing") return AlgorithmKind::Sharing;
  if (name == "two-block") return AlgorithmKind::TwoBlock;
  throw Error("unknown algorithm name: " + name);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open trace file for writing: " + path);
  os << kTraceHeader << '\n';
  char buf[64];
  for (const auto& r : rows) {
    os << r.iter << ',';
    os << format_double(r.L_value) << ',' << format_double(r.feas_gap) << ','
       << format_double(r.P_value) << ',' << format_double(r.block_step_sq) << ','
       << format_double(r.x0_step_sq) << ',' << format_double(r.dual_step_sq) << ',';
    std::snprintf(buf, sizeof(buf), "%" PRIu64, r.fired_mask);
    os << buf << ',' << format_double(r.descent_margin) << ',' << format_double(r.wall_ms)
       << '\n';
  }
  if (!os) throw Error("failed writing trace file: " + path);
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(is, line)) return {};
  if (line != kTraceHeader) throw Error("trace file has an unexpected header: " + path);
  std::vector<TraceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    TraceRow r;
    char comma;
    if (!(ls >> r.iter >> comma >> r.L_value >> comma >> r.feas_gap >> comma >> r.P_value >>
          comma >> r.block_step_sq >> comma >> r.x0_step_sq >> comma >> r.dual_step_sq >>
          comma >> r.fired_mask >> comma >> r.descent_margin >> comma >> r.wall_ms))
      throw Error("trace file has a malformed row: " + line);
    rows.push_back(r);
  }
  return rows;
}

void write_states(const std::string& path, const RunRecord& record) {
  if (!record.has_snapshots) throw Error("write_states: record has no snapshots");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open states file for writing: " + path);
  os << "ncadmm-states v1\n";
  os << "algorithm " << algorithm_name(record.algorithm) << '\n';
  const auto& first = record.snapshots.front();
  os << "snapshots " << record.snapshots.size() << '\n';
  os << "x0_dim " << first.x0.size() << '\n';
  os << "blocks " << first.xs.size() << '\n';
  os << "block_dims";
  for (const auto& x : first.xs) os << ' ' << x.size();
  os << '\n';
  os << "duals " << first.ys.size() << '\n';
  os << "dual_dims";
  for (const auto& y : first.ys) os << ' ' << y.size();
  os << '\n';
  for (std::size_t t = 0; t < record.snapshots.size(); ++t) {
    const auto& s = record.snapshots[t];
    os << "snapshot " << t << '\n';
    write_vector(os, "x0", s.x0);
    for (std::size_t k = 0; k < s.xs.size(); ++k)
      write_vector(os, ("x " + std::to_string(k + 1)).c_str(), s.xs[k]);
    for (std::size_t k = 0; k < s.ys.size(); ++k)
      write_vector(os, ("y " + std::to_string(k + 1)).c_str(), s.ys[k]);
  }
  if (!os) throw Error("failed writing states file: " + path);
}

RunRecord read_states(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open states file: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "ncadmm-states v1")
    throw Error("states file has an unexpected header: " + path);

  RunRecord record;
  std::size_t count = 0;
  Eigen::Index x0_dim = 0;
  std::vector<Eigen::Index> block_dims, dual_dims;

  auto expect_kv = [&](const std::string& key) -> std::istringstream {
    if (!std::getline(is, line)) throw Error("states file: missing " + key);
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) throw Error("states file: expected " + key + ", found " + k);
    return ls;
  };

  {
    auto ls = expect_kv("algorithm");
    std::string name;
    ls >> name;
    record.algorithm = algorithm_from_name(name);
  }
  expect_kv("snapshots") >> count;
  expect_kv("x0_dim") >> x0_dim;
  std::size_t nblocks = 0;
  expect_kv("blocks") >> nblocks;
  {
    auto ls = expect_kv("block_dims");
    block_dims.resize(nblocks);
    for (auto& d : block_dims)
      if (!(ls >> d)) throw Error("states file: truncated block_dims");
  }
  std::size_t nduals = 0;
  expect_kv("duals") >> nduals;
  {
    auto ls = expect_kv("dual_dims");
    dual_dims.resize(nduals);
    for (auto& d : dual_dims)
      if (!(ls >> d)) throw Error("states file: truncated dual_dims");
  }

  record.snapshots.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    expect_kv("snapshot");
    Snapshot s;
    {
      auto ls = expect_kv("x0");
      s.x0 = parse_vector(ls, x0_dim);
    }
    for (std::size_t k = 0; k < nblocks; ++k) {
      auto ls = expect_kv("x");
      std::size_t idx;
      ls >> idx;
      s.xs.push_back(parse_vector(ls, block_dims[k]));
    }
    for (std::size_t k = 0; k < nduals; ++k) {
      auto ls = expect_kv("y");
      std::size_t idx;
      ls >> idx;
      s.ys.push_back(parse_vector(ls, dual_dims[k]));
    }
    record.snapshots.push_back(std::move(s));
  }
  record.has_snapshots = true;
  return record;
}

}  // namespace ncadmm
