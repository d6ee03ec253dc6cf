#pragma once

#include "ibcm/problem.hpp"

#include <Eigen/Sparse>

#include <string>
#include <utility>

namespace ibcm {

/// Edge functions of a patch side: flat function index per edge-function index.
/// The direction normal to the side must be open.
std::vector<int> edge_functions(const Patch& p, Side side);
const KnotVector& edge_knots(const Patch& p, Side side);
/// Parameter point of the side at edge coordinate t.
Vec2 edge_point(const Patch& p, Side side, double t);

/// Pairs (function of a, function of b) whose traces coincide on the two edges.
/// Fails with CannotCoupleStrongly when the traces do not match one to one.
std::vector<std::pair<int, int>> match_edge_functions(const Problem& pb, const StrongCoupling& c);

/// Global numbering of patch DOFs. Functions without active support are
/// dropped, strong Dirichlet DOFs are fixed, and strongly coupled DOFs share
/// one index. Numbering follows the raw patch order and is deterministic.
class DofMap {
 public:
  explicit DofMap(const Problem& pb);

  int num_free() const { return nfree_; }
  int num_raw() const { return static_cast<int>(state_.size()); }
  int raw(int patch, int local) const { return offset_[patch] + local; }
  /// Free index or -1 for fixed and inactive DOFs.
  int global(int patch, int local) const { return index_[raw(patch, local)]; }
  bool is_fixed(int patch, int local) const { return state_[raw(patch, local)] == kFixed; }
  bool is_inactive(int patch, int local) const { return state_[raw(patch, local)] == kInactive; }
  double fixed_value(int patch, int local) const { return value_[raw(patch, local)]; }
  int num_fixed() const;
  /// Classes that merge DOFs from more than one raw entry.
  int num_shared() const { return shared_; }

 private:
  enum State : char { kFree = 0, kFixed = 1, kInactive = 2 };
  std::vector<int> offset_;
  std::vector<int> index_;
  std::vector<double> value_;
  std::vector<char> state_;
  int nfree_ = 0;
  int shared_ = 0;
};

/// mu_u = beta E tau / h and mu_theta = beta E tau^3 / h with E the largest
/// layer modulus.
struct Penalty {
  double mu_u = 0, mu_theta = 0;
};
Penalty nitsche_penalty(const Laminate& lam, double beta, double h);

struct LinearSystem {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd b;
};

enum AssemblyPart : unsigned { kInterior = 1u, kExternal = 2u, kNitsche = 4u, kAllParts = 7u };

/// Assembles the reduced system over the free DOFs of dofs. Element and
/// segment loops run in parallel blocks merged in block order, so the result
/// does not depend on the thread count.
LinearSystem assemble(const Problem& pb, const DofMap& dofs, unsigned parts = kAllParts);

/// d_i = K_ii^{-1/2}; fails with NumericalFailure on a non-positive diagonal.
Eigen::VectorXd jacobi_vector(const Eigen::SparseMatrix<double>& K);

struct SPDReport {
  bool spd = false;           ///< Cholesky of the scaled matrix succeeded
  bool symmetric = true;      ///< gamma1 = +1 system solved by Cholesky
  double pivot_ratio = 0;     ///< (max L_ii / min L_ii)^2 of the scaled factor
  double residual = 0;        ///< ||K x - b|| / ||b|| of the unscaled system
  int n = 0;
  std::string message;
};

/// Coefficients of every patch DOF, fixed and inactive entries included.
struct FieldSolution {
  std::vector<Eigen::VectorXd> coef;

  /// Field jet at eta up to the given derivative order (<= 3).
  FieldJet eval(const Problem& pb, int patch, const Vec2& eta, int order) const;
};

FieldSolution expand_solution(const Problem& pb, const DofMap& dofs, const Eigen::VectorXd& x);

struct SolveResult {
  SPDReport report;
  Eigen::VectorXd x;
  FieldSolution field;
};

/// Jacobi-scaled solve. Symmetric systems go through sparse Cholesky, which
/// doubles as the positive-definiteness gate; others use sparse LU.
SolveResult solve(const Problem& pb, const DofMap& dofs, const LinearSystem& sys, bool symmetric, bool scale = true);

/// Assembles and solves.
SolveResult run_problem(const Problem& pb, bool scale = true);

/// Writes "row col value" lines, one per stored entry, 0-based.
void write_triplets(const Eigen::SparseMatrix<double>& K, const std::string& path);

}  // namespace ibcm
