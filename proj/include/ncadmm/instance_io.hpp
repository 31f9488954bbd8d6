#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncadmm/problem.hpp"

namespace ncadmm {

/// Serializable description of a smooth function in one of the named forms.
/// realize() builds the SmoothBlock, wiring up the callables for the
/// non-quadratic forms; lipschitz and convex are stored rather than
/// recomputed so a written file is authoritative.
struct SmoothDesc {
  enum class Kind {
    Quadratic,  ///< 0.5 x'Qx + b'x + c
    Sigmoid,    ///< sum_i logistic(row_i(A) x - offsets_i)
    CosRipple,  ///< 0.5 ||u - target||^2 - mu sum_i cos(u_i)
  };

  Kind kind = Kind::Quadratic;
  int dim = 0;
  double lipschitz = 0.0;
  bool convex = false;

  Matrix Q;
  Vector b;
  double c = 0.0;

  Matrix A;
  Vector offsets;

  Vector target;
  double mu = 0.0;

  SmoothBlock realize() const;
};

SmoothDesc quadratic_desc(Matrix Q, Vector b, double c, double lipschitz, bool convex);
SmoothDesc sigmoid_desc(Matrix A, Vector offsets);
SmoothDesc cos_ripple_desc(Vector target, double mu);

/// Descriptions of whole problems: everything in them serializes. Custom
/// regularizers cannot be written (writers throw ValidationError on them).
struct ConsensusDesc {
  std::vector<SmoothDesc> blocks;
  Regularizer regularizer;
  FeasibleSet set;
  double f_lower = 0.0;
  std::string family;

  ConsensusProblem realize_problem() const;
};

struct SharingBlockDesc {
  bool is_prox = false;
  SmoothDesc g;          ///< smooth blocks
  Regularizer g_prox;    ///< prox blocks
  Matrix A;
  FeasibleSet set;
};

struct SharingDesc {
  std::vector<SharingBlockDesc> blocks;
  SmoothDesc coupling;
  double f_lower = 0.0;
  std::string family;

  SharingProblem realize_problem() const;
};

struct TwoBlockDesc {
  Regularizer f;
  FeasibleSet set;
  SmoothDesc g;
  Matrix B;
  Matrix A;
  Vector c;
  double f_lower = 0.0;
  std::string family;

  TwoBlockProblem realize_problem() const;
};

/// Instance files ("ncadmm-instance v1"): whitespace-separated tokens,
/// doubles written with 17 significant digits, matrices dense row-major.
void write_instance(const std::string& path, const ConsensusDesc& desc);
void write_instance(const std::string& path, const SharingDesc& desc);
void write_instance(const std::string& path, const TwoBlockDesc& desc);

/// One loaded instance of whichever class the file declares.
struct InstanceFile {
  std::string problem_class;  ///< "consensus", "sharing", or "two-block"
  std::optional<ConsensusDesc> consensus;
  std::optional<SharingDesc> sharing;
  std::optional<TwoBlockDesc> two_block;
};

InstanceFile read_instance(const std::string& path);

}  // namespace ncadmm
