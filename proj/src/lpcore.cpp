#include "cil/lpcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace cil::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-8;
constexpr int kDegenerateLimit = 50;
constexpr int kRefactorPeriod = 64;

enum VarState : int { kAtLower, kAtUpper, kBasic, kAtZeroFree };

// Working problem: A x = b with bounds, artificials appended last.
struct Tableau {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd lo, hi;
  Eigen::VectorXd cost;        // phase-2 cost
  int num_structural = 0;      // original + slack count
  int m = 0, n = 0;

  std::vector<int> basis;      // size m, variable index per row
  std::vector<int> state;      // size n
  Eigen::VectorXd x;           // size n, current values
  Eigen::MatrixXd binv;        // m x m

  void refactor() {
    Eigen::MatrixXd bmat(m, m);
    for (int r = 0; r < m; ++r) bmat.col(r) = a.col(basis[r]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
    binv = lu.inverse();
  }

  void recompute_basics() {
    Eigen::VectorXd rhs = b;
    for (int j = 0; j < n; ++j)
      if (state[j] != kBasic && x[j] != 0.0) rhs -= a.col(j) * x[j];
    Eigen::VectorXd xb = binv * rhs;
    for (int r = 0; r < m; ++r) x[basis[r]] = xb[r];
  }
};

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

// Runs the simplex on the given phase cost. Returns false on iteration blowup.
// Sets *unbounded when a descent ray is found (phase 2 only).
bool run_simplex(Tableau& t, const Eigen::VectorXd& phase_cost, bool* unbounded) {
  *unbounded = false;
  const int max_iters = 200 * (t.m + t.n) + 2000;
  int degenerate_streak = 0;
  int since_refactor = 0;

  for (int iter = 0; iter < max_iters; ++iter) {
    // reduced costs
    Eigen::VectorXd cb(t.m);
    for (int r = 0; r < t.m; ++r) cb[r] = phase_cost[t.basis[r]];
    Eigen::VectorXd y = t.binv.transpose() * cb;

    const bool bland = degenerate_streak >= kDegenerateLimit;
    int enter = -1, dir = 0;
    double best = kCostTol;
    for (int j = 0; j < t.n; ++j) {
      if (t.state[j] == kBasic) continue;
      double d = phase_cost[j] - y.dot(t.a.col(j));
      int cand_dir = 0;
      double viol = 0.0;
      if (t.state[j] == kAtLower && d < -kCostTol) { cand_dir = +1; viol = -d; }
      else if (t.state[j] == kAtUpper && d > kCostTol) { cand_dir = -1; viol = d; }
      else if (t.state[j] == kAtZeroFree && std::abs(d) > kCostTol) {
        cand_dir = d < 0 ? +1 : -1;
        viol = std::abs(d);
      }
      if (cand_dir == 0) continue;
      if (bland) { enter = j; dir = cand_dir; break; }
      if (viol > best) { best = viol; enter = j; dir = cand_dir; }
    }
    if (enter < 0) return true;  // optimal for this phase

    Eigen::VectorXd w = t.binv * t.a.col(enter);

    // ratio test: step tmax >= 0 along x_enter += dir * tstep
    double tmax = kInf;
    int leave_row = -1;
    int leave_to = 0;  // bound the leaving basic lands on
    // entering variable's own opposite bound
    double own_range = (dir > 0) ? (t.hi[enter] - t.x[enter]) : (t.x[enter] - t.lo[enter]);
    if (std::isfinite(own_range) && own_range < tmax) { tmax = own_range; leave_row = -2; }
    for (int r = 0; r < t.m; ++r) {
      double delta = -dir * w[r];  // d(x_basic[r]) / d(tstep)
      int bj = t.basis[r];
      if (delta > kPivotTol) {
        double room = t.hi[bj] - t.x[bj];
        if (std::isfinite(room)) {
          double ratio = room / delta;
          if (ratio < tmax - 1e-12 || (ratio < tmax + 1e-12 && (leave_row < 0 || bj < t.basis[leave_row]))) {
            tmax = std::max(0.0, ratio); leave_row = r; leave_to = kAtUpper;
          }
        }
      } else if (delta < -kPivotTol) {
        double room = t.x[bj] - t.lo[bj];
        if (std::isfinite(room)) {
          double ratio = room / (-delta);
          if (ratio < tmax - 1e-12 || (ratio < tmax + 1e-12 && (leave_row < 0 || bj < t.basis[leave_row]))) {
            tmax = std::max(0.0, ratio); leave_row = r; leave_to = kAtLower;
          }
        }
      }
    }
    if (!std::isfinite(tmax)) { *unbounded = true; return true; }

    degenerate_streak = (tmax <= kPivotTol) ? degenerate_streak + 1 : 0;

    // apply step
    t.x[enter] += dir * tmax;
    for (int r = 0; r < t.m; ++r) t.x[t.basis[r]] -= dir * tmax * w[r];

    if (leave_row == -2) {
      // bound flip, basis unchanged
      t.state[enter] = (dir > 0) ? kAtUpper : kAtLower;
      continue;
    }
    int leave_var = t.basis[leave_row];
    if (std::abs(w[leave_row]) < kPivotTol) {
      t.refactor();
      t.recompute_basics();
      ++degenerate_streak;
      continue;
    }
    // pin the leaving variable exactly on its bound
    t.x[leave_var] = (leave_to == kAtUpper) ? t.hi[leave_var] : t.lo[leave_var];
    t.state[leave_var] = leave_to;
    t.state[enter] = kBasic;
    t.basis[leave_row] = enter;

    // product-form update of binv
    Eigen::VectorXd pivot_row = t.binv.row(leave_row);
    double piv = w[leave_row];
    for (int r = 0; r < t.m; ++r) {
      if (r == leave_row) continue;
      double factor = w[r] / piv;
      if (factor != 0.0) t.binv.row(r) -= factor * pivot_row;
    }
    t.binv.row(leave_row) = pivot_row / piv;

    if (++since_refactor >= kRefactorPeriod) {
      t.refactor();
      t.recompute_basics();
      since_refactor = 0;
    }
  }
  return false;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

LinearProgram LinearProgram::with_vars(int n) {
  LinearProgram lp;
  lp.cost = Eigen::VectorXd::Zero(n);
  lp.eq_lhs.resize(0, n);
  lp.eq_rhs.resize(0);
  lp.ub_lhs.resize(0, n);
  lp.ub_rhs.resize(0);
  lp.lower = Eigen::VectorXd::Constant(n, -kInf);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  return lp;
}

int LinearProgram::add_vars(int count, double lo, double hi, double cost_coeff) {
  int first = num_vars();
  int n = first + count;
  cost.conservativeResize(n);
  lower.conservativeResize(n);
  upper.conservativeResize(n);
  cost.segment(first, count).setConstant(cost_coeff);
  lower.segment(first, count).setConstant(lo);
  upper.segment(first, count).setConstant(hi);
  eq_lhs.conservativeResize(eq_lhs.rows(), n);
  ub_lhs.conservativeResize(ub_lhs.rows(), n);
  if (count > 0) {
    eq_lhs.rightCols(count).setZero();
    ub_lhs.rightCols(count).setZero();
  }
  return first;
}

void LinearProgram::add_equality(const Eigen::VectorXd& row, double rhs) {
  eq_lhs.conservativeResize(eq_lhs.rows() + 1, num_vars());
  eq_lhs.row(eq_lhs.rows() - 1) = row.transpose();
  eq_rhs.conservativeResize(eq_rhs.size() + 1);
  eq_rhs[eq_rhs.size() - 1] = rhs;
}

void LinearProgram::add_inequality(const Eigen::VectorXd& row, double rhs) {
  ub_lhs.conservativeResize(ub_lhs.rows() + 1, num_vars());
  ub_lhs.row(ub_lhs.rows() - 1) = row.transpose();
  ub_rhs.conservativeResize(ub_rhs.size() + 1);
  ub_rhs[ub_rhs.size() - 1] = rhs;
}

void LinearProgram::validate() const {
  const int n = num_vars();
  if (eq_lhs.rows() != eq_rhs.size() || (eq_lhs.rows() > 0 && eq_lhs.cols() != n))
    throw std::invalid_argument("lp: equality block dimension mismatch");
  if (ub_lhs.rows() != ub_rhs.size() || (ub_lhs.rows() > 0 && ub_lhs.cols() != n))
    throw std::invalid_argument("lp: inequality block dimension mismatch");
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("lp: bound vector dimension mismatch");
  if (!cost.allFinite()) throw std::invalid_argument("lp: non-finite cost");
}

LpSolution solve(const LinearProgram& lp) {
  lp.validate();
  const int n0 = lp.num_vars();
  const int m_eq = static_cast<int>(lp.eq_lhs.rows());
  const int m_ub = static_cast<int>(lp.ub_lhs.rows());
  const int m = m_eq + m_ub;

  Tableau t;
  t.m = m;
  t.num_structural = n0 + m_ub;
  t.n = t.num_structural + m;  // + artificials
  t.a = Eigen::MatrixXd::Zero(m, t.n);
  t.b = Eigen::VectorXd::Zero(m);
  if (m_eq > 0) {
    t.a.topLeftCorner(m_eq, n0) = lp.eq_lhs;
    t.b.head(m_eq) = lp.eq_rhs;
  }
  if (m_ub > 0) {
    t.a.block(m_eq, 0, m_ub, n0) = lp.ub_lhs;
    t.a.block(m_eq, n0, m_ub, m_ub).setIdentity();
    t.b.tail(m_ub) = lp.ub_rhs;
  }
  t.lo = Eigen::VectorXd::Zero(t.n);
  t.hi = Eigen::VectorXd::Zero(t.n);
  t.lo.head(n0) = lp.lower;
  t.hi.head(n0) = lp.upper;
  t.lo.segment(n0, m_ub).setConstant(0.0);
  t.hi.segment(n0, m_ub).setConstant(kInf);
  t.cost = Eigen::VectorXd::Zero(t.n);
  t.cost.head(n0) = lp.cost;

  // nonbasic start: finite lower, else finite upper, else 0
  t.x = Eigen::VectorXd::Zero(t.n);
  t.state.assign(t.n, kAtLower);
  for (int j = 0; j < t.num_structural; ++j) {
    if (std::isfinite(t.lo[j])) { t.x[j] = t.lo[j]; t.state[j] = kAtLower; }
    else if (std::isfinite(t.hi[j])) { t.x[j] = t.hi[j]; t.state[j] = kAtUpper; }
    else { t.x[j] = 0.0; t.state[j] = kAtZeroFree; }
    if (t.lo[j] > t.hi[j]) {
      LpSolution sol;
      sol.status = SolveStatus::kInfeasible;
      return sol;
    }
  }

  // artificials sized to the residual sign
  Eigen::VectorXd resid = t.b;
  for (int j = 0; j < t.num_structural; ++j)
    if (t.x[j] != 0.0) resid -= t.a.col(j) * t.x[j];
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(t.n);
  t.basis.resize(m);
  for (int r = 0; r < m; ++r) {
    int aj = t.num_structural + r;
    t.a(r, aj) = (resid[r] >= 0.0) ? 1.0 : -1.0;
    t.lo[aj] = 0.0;
    t.hi[aj] = kInf;
    t.x[aj] = std::abs(resid[r]);
    t.state[aj] = kBasic;
    t.basis[r] = aj;
    phase1[aj] = 1.0;
  }
  t.binv = Eigen::MatrixXd::Identity(m, m);
  for (int r = 0; r < m; ++r) t.binv(r, r) = t.a(r, t.num_structural + r);  // +-1 diagonal

  bool unbounded = false;
  if (!run_simplex(t, phase1, &unbounded))
    throw NumericalFailure("simplex phase 1 exceeded iteration limit");
  double phase1_obj = 0.0;
  for (int r = 0; r < m; ++r)
    if (t.basis[r] >= t.num_structural) phase1_obj += t.x[t.basis[r]];
  double scale = 1.0 + t.b.cwiseAbs().maxCoeff();
  LpSolution sol;
  if (phase1_obj > kFeasTol * scale) {
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  // lock artificials at zero
  for (int j = t.num_structural; j < t.n; ++j) { t.lo[j] = 0.0; t.hi[j] = 0.0; }

  if (!run_simplex(t, t.cost, &unbounded))
    throw NumericalFailure("simplex phase 2 exceeded iteration limit");
  if (unbounded) {
    sol.status = SolveStatus::kUnbounded;
    return sol;
  }

  t.refactor();
  t.recompute_basics();
  sol.status = SolveStatus::kOptimal;
  sol.z = t.x.head(n0);
  sol.objective = lp.cost.dot(sol.z);

  // primal residuals
  double res = 0.0;
  if (m_eq > 0) res = (lp.eq_lhs * sol.z - lp.eq_rhs).cwiseAbs().maxCoeff();
  if (m_ub > 0) res = std::max(res, (lp.ub_lhs * sol.z - lp.ub_rhs).cwiseMax(0.0).maxCoeff());
  for (int j = 0; j < n0; ++j) {
    if (std::isfinite(lp.lower[j])) res = std::max(res, lp.lower[j] - sol.z[j]);
    if (std::isfinite(lp.upper[j])) res = std::max(res, sol.z[j] - lp.upper[j]);
  }
  sol.max_residual = std::max(0.0, res);

  // dual bound: y'b + sum_j min over [lo,hi] of d_j x_j
  Eigen::VectorXd cb(m);
  for (int r = 0; r < m; ++r) cb[r] = t.cost[t.basis[r]];
  Eigen::VectorXd y = t.binv.transpose() * cb;
  double dual_value = y.dot(t.b);
  bool dual_finite = true;
  for (int j = 0; j < t.num_structural; ++j) {
    if (t.state[j] == kBasic) continue;
    double d = t.cost[j] - y.dot(t.a.col(j));
    double contrib;
    if (d >= 0.0) contrib = std::isfinite(t.lo[j]) ? d * t.lo[j] : (d <= kCostTol ? 0.0 : -kInf);
    else contrib = std::isfinite(t.hi[j]) ? d * t.hi[j] : (d >= -kCostTol ? 0.0 : -kInf);
    if (!std::isfinite(contrib)) { dual_finite = false; break; }
    dual_value += contrib;
  }
  sol.duality_gap = dual_finite ? std::abs(sol.objective - dual_value) : kInf;
  sol.dual = y;

  double objscale = 1.0 + std::abs(sol.objective);
  if (sol.max_residual > 1e-6 * scale || sol.duality_gap > 1e-5 * objscale)
    throw NumericalFailure("simplex finished without a certifiable optimum (residual " +
                           std::to_string(sol.max_residual) + ", gap " +
                           std::to_string(sol.duality_gap) + ")");
  return sol;
}

int l1_epigraph(LinearProgram& lp, const std::vector<AffineExpr>& rows) {
  if (rows.empty()) return -1;
  const int n_before = lp.num_vars();
  const int first_t = lp.add_vars(static_cast<int>(rows.size()), -kInf, kInf, 1.0);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].coeffs.size() != n_before)
      throw std::invalid_argument("l1_epigraph: expression width mismatch");
    Eigen::VectorXd row = Eigen::VectorXd::Zero(lp.num_vars());
    // row_r - t_r <= -offset   and   -row_r - t_r <= offset
    row.head(n_before) = rows[r].coeffs;
    row[first_t + static_cast<int>(r)] = -1.0;
    lp.add_inequality(row, -rows[r].offset);
    row.head(n_before) = -rows[r].coeffs;
    lp.add_inequality(row, rows[r].offset);
  }
  return first_t;
}

void dump_lp_format(const LinearProgram& lp, std::ostream& os) {
  os.precision(17);
  os << "Minimize\n obj:";
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.cost[j] != 0.0) os << " " << (lp.cost[j] >= 0 ? "+" : "") << lp.cost[j] << " x" << j;
  os << "\nSubject To\n";
  for (int r = 0; r < lp.eq_lhs.rows(); ++r) {
    os << " e" << r << ":";
    for (int j = 0; j < lp.num_vars(); ++j)
      if (lp.eq_lhs(r, j) != 0.0)
        os << " " << (lp.eq_lhs(r, j) >= 0 ? "+" : "") << lp.eq_lhs(r, j) << " x" << j;
    os << " = " << lp.eq_rhs[r] << "\n";
  }
  for (int r = 0; r < lp.ub_lhs.rows(); ++r) {
    os << " i" << r << ":";
    for (int j = 0; j < lp.num_vars(); ++j)
      if (lp.ub_lhs(r, j) != 0.0)
        os << " " << (lp.ub_lhs(r, j) >= 0 ? "+" : "") << lp.ub_lhs(r, j) << " x" << j;
    os << " <= " << lp.ub_rhs[r] << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j]))
      os << " " << lp.lower[j] << " <= x" << j << " <= " << lp.upper[j] << "\n";
    else if (std::isfinite(lp.lower[j]))
      os << " x" << j << " >= " << lp.lower[j] << "\n";
    else if (std::isfinite(lp.upper[j]))
      os << " -inf <= x" << j << " <= " << lp.upper[j] << "\n";
    else
      os << " x" << j << " free\n";
  }
  os << "End\n";
}

}  // namespace cil::lp
