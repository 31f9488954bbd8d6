#include "ncadmm/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ncadmm/errors.hpp"
#include "ncadmm/trace.hpp"

namespace ncadmm {

namespace {

constexpr double kSigmoidCurvature = 0.09622504486493762;  // 1 / (6 sqrt(3))

}  // namespace

SmoothBlock SmoothDesc::realize() const {
  switch (kind) {
    case Kind::Quadratic:
      return quadratic_block(Q, b, c, lipschitz, convex);
    case Kind::Sigmoid: {
      const Matrix terms = A;
      const Vector shift = offsets;
      auto value = [terms, shift](const Vector& x) -> double {
        const Vector z = terms * x - shift;
        double total = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) total += 1.0 / (1.0 + std::exp(-z(i)));
        return total;
      };
      auto grad = [terms, shift](const Vector& x) -> Vector {
        const Vector z = terms * x - shift;
        Vector w(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          const double s = 1.0 / (1.0 + std::exp(-z(i)));
          w(i) = s * (1.0 - s);
        }
        return terms.transpose() * w;
      };
      return custom_block(dim, value, grad, lipschitz, false);
    }
    case Kind::CosRipple: {
      const Vector center = target;
      const double ripple = mu;
      auto value = [center, ripple](const Vector& u) -> double {
        double cos_sum = 0.0;
        for (Eigen::Index i = 0; i < u.size(); ++i) cos_sum += std::cos(u(i));
        return 0.5 * (u - center).squaredNorm() - ripple * cos_sum;
      };
      auto grad = [center, ripple](const Vector& u) -> Vector {
        Vector g = u - center;
        for (Eigen::Index i = 0; i < u.size(); ++i) g(i) += ripple * std::sin(u(i));
        return g;
      };
      return custom_block(dim, value, grad, lipschitz, false);
    }
  }
  throw Error("unreachable smooth kind");
}

SmoothDesc quadratic_desc(Matrix Q, Vector b, double c, double lipschitz, bool convex) {
  SmoothDesc desc;
  desc.kind = SmoothDesc::Kind::Quadratic;
  desc.dim = static_cast<int>(Q.rows());
  desc.lipschitz = lipschitz;
  desc.convex = convex;
  desc.Q = std::move(Q);
  desc.b = std::move(b);
  desc.c = c;
  return desc;
}

SmoothDesc sigmoid_desc(Matrix A, Vector offsets) {
  SmoothDesc desc;
  desc.kind = SmoothDesc::Kind::Sigmoid;
  desc.dim = static_cast<int>(A.cols());
  desc.lipschitz = kSigmoidCurvature * A.squaredNorm();
  desc.convex = false;
  desc.A = std::move(A);
  desc.offsets = std::move(offsets);
  return desc;
}

SmoothDesc cos_ripple_desc(Vector target, double mu) {
  SmoothDesc desc;
  desc.kind = SmoothDesc::Kind::CosRipple;
  desc.dim = static_cast<int>(target.size());
  desc.lipschitz = 1.0 + mu;
  desc.convex = false;
  desc.target = std::move(target);
  desc.mu = mu;
  return desc;
}

ConsensusProblem ConsensusDesc::realize_problem() const {
  std::vector<SmoothBlock> realized;
  realized.reserve(blocks.size());
  for (const SmoothDesc& block : blocks) realized.push_back(block.realize());
  return ConsensusProblem(std::move(realized), regularizer, set);
}

SharingProblem SharingDesc::realize_problem() const {
  std::vector<SharingBlock> realized;
  realized.reserve(blocks.size());
  for (const SharingBlockDesc& block : blocks) {
    if (block.is_prox) {
      realized.push_back(convex_prox_sharing_block(block.g_prox, block.A, block.set));
    } else {
      realized.push_back(smooth_sharing_block(block.g.realize(), block.A, block.set));
    }
  }
  return SharingProblem(std::move(realized), coupling.realize());
}

TwoBlockProblem TwoBlockDesc::realize_problem() const {
  return TwoBlockProblem(f, set, g.realize(), B, A, c);
}

namespace {

class TokenWriter {
 public:
  explicit TokenWriter(const std::string& path) : out_(path) {
    if (!out_) throw Error("cannot open " + path + " for writing");
  }

  void word(const std::string& w) { out_ << w << "\n"; }
  void pair(const std::string& key, const std::string& v) { out_ << key << " " << v << "\n"; }
  void pair(const std::string& key, long v) { out_ << key << " " << v << "\n"; }
  void pair(const std::string& key, double v) { out_ << key << " " << format_double(v) << "\n"; }

  void vector(const std::string& key, const Vector& v) {
    out_ << key << " " << v.size() << "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out_ << format_double(v(i)) << (i + 1 == v.size() ? "\n" : " ");
    }
    if (v.size() == 0) out_ << "\n";
  }

  void matrix(const std::string& key, const Matrix& m) {
    out_ << key << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out_ << format_double(m(i, j)) << (j + 1 == m.cols() ? "\n" : " ");
      }
    }
  }

  void close(const std::string& path) {
    out_.flush();
    if (!out_) throw Error("write to " + path + " failed");
  }

 private:
  std::ofstream out_;
};

class TokenReader {
 public:
  explicit TokenReader(const std::string& path) : in_(path), path_(path) {
    if (!in_) throw Error("cannot open " + path);
  }

  std::string next() {
    std::string token;
    if (!(in_ >> token)) throw Error(path_ + ": unexpected end of file");
    return token;
  }

  void expect(const std::string& token) {
    const std::string got = next();
    if (got != token) {
      throw Error(path_ + ": expected '" + token + "', got '" + got + "'");
    }
  }

  long integer() {
    const std::string token = next();
    try {
      return std::stol(token);
    } catch (const std::exception&) {
      throw Error(path_ + ": expected an integer, got '" + token + "'");
    }
  }

  double real() {
    const std::string token = next();
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return v;
    } catch (const std::exception&) {
      throw Error(path_ + ": expected a number, got '" + token + "'");
    }
  }

  Vector vector(const std::string& key) {
    expect(key);
    const long n = integer();
    Vector v(n);
    for (long i = 0; i < n; ++i) v(i) = real();
    return v;
  }

  Matrix matrix(const std::string& key) {
    expect(key);
    const long rows = integer();
    const long cols = integer();
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j) m(i, j) = real();
    }
    return m;
  }

  const std::string& path() const { return path_; }

 private:
  std::ifstream in_;
  std::string path_;
};

void write_smooth(TokenWriter& w, const SmoothDesc& desc) {
  switch (desc.kind) {
    case SmoothDesc::Kind::Quadratic:
      w.word("smooth quadratic");
      w.pair("dim", static_cast<long>(desc.dim));
      w.pair("lipschitz", desc.lipschitz);
      w.pair("convex", static_cast<long>(desc.convex ? 1 : 0));
      w.matrix("Q", desc.Q);
      w.vector("b", desc.b);
      w.pair("c", desc.c);
      break;
    case SmoothDesc::Kind::Sigmoid:
      w.word("smooth sigmoid");
      w.pair("dim", static_cast<long>(desc.dim));
      w.pair("lipschitz", desc.lipschitz);
      w.matrix("A", desc.A);
      w.vector("offsets", desc.offsets);
      break;
    case SmoothDesc::Kind::CosRipple:
      w.word("smooth cos-ripple");
      w.pair("dim", static_cast<long>(desc.dim));
      w.pair("lipschitz", desc.lipschitz);
      w.pair("mu", desc.mu);
      w.vector("target", desc.target);
      break;
  }
}

SmoothDesc read_smooth(TokenReader& r) {
  r.expect("smooth");
  const std::string kind = r.next();
  SmoothDesc desc;
  if (kind == "quadratic") {
    desc.kind = SmoothDesc::Kind::Quadratic;
    r.expect("dim");
    desc.dim = static_cast<int>(r.integer());
    r.expect("lipschitz");
    desc.lipschitz = r.real();
    r.expect("convex");
    desc.convex = r.integer() != 0;
    desc.Q = r.matrix("Q");
    desc.b = r.vector("b");
    r.expect("c");
    desc.c = r.real();
  } else if (kind == "sigmoid") {
    desc.kind = SmoothDesc::Kind::Sigmoid;
    r.expect("dim");
    desc.dim = static_cast<int>(r.integer());
    r.expect("lipschitz");
    desc.lipschitz = r.real();
    desc.A = r.matrix("A");
    desc.offsets = r.vector("offsets");
  } else if (kind == "cos-ripple") {
    desc.kind = SmoothDesc::Kind::CosRipple;
    r.expect("dim");
    desc.dim = static_cast<int>(r.integer());
    r.expect("lipschitz");
    desc.lipschitz = r.real();
    r.expect("mu");
    desc.mu = r.real();
    desc.target = r.vector("target");
  } else {
    throw Error(r.path() + ": unknown smooth kind '" + kind + "'");
  }
  return desc;
}

void write_regularizer(TokenWriter& w, const Regularizer& reg) {
  switch (reg.kind) {
    case Regularizer::Kind::Zero:
      w.word("regularizer zero");
      w.pair("dim", static_cast<long>(reg.dim));
      break;
    case Regularizer::Kind::L1:
      w.word("regularizer l1");
      w.pair("dim", static_cast<long>(reg.dim));
      w.pair("lambda", reg.lambda);
      break;
    case Regularizer::Kind::BoxIndicator:
      w.word("regularizer box");
      w.vector("lo", reg.lo);
      w.vector("hi", reg.hi);
      break;
    case Regularizer::Kind::Custom:
      throw ValidationError("custom regularizers cannot be written to instance files");
  }
}

Regularizer read_regularizer(TokenReader& r) {
  r.expect("regularizer");
  const std::string kind = r.next();
  if (kind == "zero") {
    r.expect("dim");
    return zero_regularizer(static_cast<int>(r.integer()));
  }
  if (kind == "l1") {
    r.expect("dim");
    const int dim = static_cast<int>(r.integer());
    r.expect("lambda");
    return l1_regularizer(dim, r.real());
  }
  if (kind == "box") {
    const Vector lo = r.vector("lo");
    const Vector hi = r.vector("hi");
    return box_regularizer(lo, hi);
  }
  throw Error(r.path() + ": unknown regularizer kind '" + kind + "'");
}

void write_set(TokenWriter& w, const FeasibleSet& set) {
  switch (set.kind) {
    case FeasibleSet::Kind::WholeSpace:
      w.word("set whole");
      w.pair("dim", static_cast<long>(set.dim));
      break;
    case FeasibleSet::Kind::Box:
      w.word("set box");
      w.vector("lo", set.lo);
      w.vector("hi", set.hi);
      break;
    case FeasibleSet::Kind::Ball:
      w.word("set ball");
      w.vector("center", set.center);
      w.pair("radius", set.radius);
      break;
  }
}

FeasibleSet read_set(TokenReader& r) {
  r.expect("set");
  const std::string kind = r.next();
  if (kind == "whole") {
    r.expect("dim");
    return whole_space(static_cast<int>(r.integer()));
  }
  if (kind == "box") {
    const Vector lo = r.vector("lo");
    const Vector hi = r.vector("hi");
    return box_set(lo, hi);
  }
  if (kind == "ball") {
    const Vector center = r.vector("center");
    r.expect("radius");
    return ball_set(center, r.real());
  }
  throw Error(r.path() + ": unknown set kind '" + kind + "'");
}

void write_header(TokenWriter& w, const std::string& problem_class, const std::string& family,
                  double f_lower) {
  w.word("ncadmm-instance v1");
  w.pair("class", problem_class);
  w.pair("family", family.empty() ? std::string("unnamed") : family);
  w.pair("f_lower", f_lower);
}

}  // namespace

void write_instance(const std::string& path, const ConsensusDesc& desc) {
  TokenWriter w(path);
  write_header(w, "consensus", desc.family, desc.f_lower);
  w.pair("blocks", static_cast<long>(desc.blocks.size()));
  for (const SmoothDesc& block : desc.blocks) write_smooth(w, block);
  write_regularizer(w, desc.regularizer);
  write_set(w, desc.set);
  w.close(path);
}

void write_instance(const std::string& path, const SharingDesc& desc) {
  TokenWriter w(path);
  write_header(w, "sharing", desc.family, desc.f_lower);
  w.pair("blocks", static_cast<long>(desc.blocks.size()));
  for (const SharingBlockDesc& block : desc.blocks) {
    w.pair("block", std::string(block.is_prox ? "prox" : "smooth-block"));
    if (block.is_prox) {
      write_regularizer(w, block.g_prox);
    } else {
      write_smooth(w, block.g);
    }
    w.matrix("A", block.A);
    write_set(w, block.set);
  }
  w.word("coupling");
  write_smooth(w, desc.coupling);
  w.close(path);
}

void write_instance(const std::string& path, const TwoBlockDesc& desc) {
  TokenWriter w(path);
  write_header(w, "two-block", desc.family, desc.f_lower);
  write_regularizer(w, desc.f);
  write_set(w, desc.set);
  write_smooth(w, desc.g);
  w.matrix("B", desc.B);
  w.matrix("A", desc.A);
  w.vector("c", desc.c);
  w.close(path);
}

InstanceFile read_instance(const std::string& path) {
  TokenReader r(path);
  r.expect("ncadmm-instance");
  r.expect("v1");
  r.expect("class");
  InstanceFile file;
  file.problem_class = r.next();
  r.expect("family");
  const std::string family = r.next();
  r.expect("f_lower");
  const double f_lower = r.real();

  if (file.problem_class == "consensus") {
    ConsensusDesc desc;
    desc.family = family;
    desc.f_lower = f_lower;
    r.expect("blocks");
    const long count = r.integer();
    for (long k = 0; k < count; ++k) desc.blocks.push_back(read_smooth(r));
    desc.regularizer = read_regularizer(r);
    desc.set = read_set(r);
    file.consensus = std::move(desc);
  } else if (file.problem_class == "sharing") {
    SharingDesc desc;
    desc.family = family;
    desc.f_lower = f_lower;
    r.expect("blocks");
    const long count = r.integer();
    for (long k = 0; k < count; ++k) {
      SharingBlockDesc block;
      r.expect("block");
      const std::string kind = r.next();
      if (kind == "prox") {
        block.is_prox = true;
        block.g_prox = read_regularizer(r);
      } else if (kind == "smooth-block") {
        block.g = read_smooth(r);
      } else {
        throw Error(path + ": unknown sharing block kind '" + kind + "'");
      }
      block.A = r.matrix("A");
      block.set = read_set(r);
      desc.blocks.push_back(std::move(block));
    }
    r.expect("coupling");
    desc.coupling = read_smooth(r);
    file.sharing = std::move(desc);
  } else if (file.problem_class == "two-block") {
    TwoBlockDesc desc;
    desc.family = family;
    desc.f_lower = f_lower;
    desc.f = read_regularizer(r);
    desc.set = read_set(r);
    desc.g = read_smooth(r);
    desc.B = r.matrix("B");
    desc.A = r.matrix("A");
    desc.c = r.vector("c");
    file.two_block = std::move(desc);
  } else {
    throw Error(path + ": unknown problem class '" + file.problem_class + "'");
  }
  return file;
}

}  // namespace ncadmm
