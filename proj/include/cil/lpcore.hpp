#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cil::lp {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(SolveStatus s);

/// Thrown when the solver cannot certify any status (distinct from infeasible).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Dense LP: min cost'z  s.t.  eq_lhs z = eq_rhs,  ub_lhs z <= ub_rhs,  lower <= z <= upper.
/// Bounds may be +-infinity.
struct LinearProgram {
  Eigen::VectorXd cost;
  Eigen::MatrixXd eq_lhs;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ub_lhs;
  Eigen::VectorXd ub_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static LinearProgram with_vars(int n);

  int num_vars() const { return static_cast<int>(cost.size()); }

  /// Appends `count` variables with the given bounds and zero cost; returns the
  /// index of the first new variable.
  int add_vars(int count, double lo, double hi, double cost_coeff = 0.0);

  void add_equality(const Eigen::VectorXd& row, double rhs);
  void add_inequality(const Eigen::VectorXd& row, double rhs);  // row.z <= rhs

  /// Dimensional consistency check; throws std::invalid_argument on mismatch.
  void validate() const;
};

struct LpSolution {
  SolveStatus status = SolveStatus::kOptimal;
  Eigen::VectorXd z;
  double objective = 0.0;
  /// Max absolute violation of equalities/inequalities/bounds at z.
  double max_residual = 0.0;
  /// c'z minus the dual bound built from the final multipliers; ~0 at a clean optimum.
  double duality_gap = 0.0;
  /// Row multipliers (equalities first, then inequalities).
  Eigen::VectorXd dual;
};

/// Two-phase primal simplex on bounded variables. Deterministic: Dantzig pricing
/// with lowest-index ties, Bland's rule after 50 consecutive degenerate pivots.
LpSolution solve(const LinearProgram& lp);

/// An affine expression over LP variables: coeffs'z + offset.
struct AffineExpr {
  Eigen::VectorXd coeffs;
  double offset = 0.0;
};

/// Adds epigraph variables t_r with t_r >= row_r, t_r >= -row_r and unit cost, so
/// minimizing the program minimizes sum_r |row_r|. Returns the index of the first
/// t variable (or -1 for an empty list).
int l1_epigraph(LinearProgram& lp, const std::vector<AffineExpr>& rows);

/// Plain-text LP-format dump for cross-checking with external solvers.
void dump_lp_format(const LinearProgram& lp, std::ostream& os);

}  // namespace cil::lp
