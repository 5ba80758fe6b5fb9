#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sparse.hpp"

namespace hfg {

// min  x^T diag(f_quad) x + f_lin^T x
// s.t. a_eq x = b_eq,  d_ineq x <= e_ineq
struct QuadraticProgram {
  std::vector<double> f_quad;  // diagonal of the quadratic coefficient matrix, >= 0
  std::vector<double> f_lin;
  SparseMatrix a_eq;
  std::vector<double> b_eq;
  SparseMatrix d_ineq;
  std::vector<double> e_ineq;

  int n() const { return static_cast<int>(f_quad.size()); }
  void validate() const;  // throws Error(argument) on shape or sign problems
};

enum class QpStatus { optimal, infeasible, unbounded, max_iterations };

const char* to_string(QpStatus status);

struct QpResiduals {
  double feasibility = 0.0;      // max of |a_eq x - b|_inf and positive part of d x - e
  double stationarity = 0.0;     // |2 diag(f_quad) x + f_lin + a_eq^T lam + d^T mu|_inf
  double complementarity = 0.0;  // max_j |mu_j (d_j x - e_j)|
};

struct QpSolution {
  QpStatus status = QpStatus::max_iterations;
  std::vector<double> x;
  std::vector<double> duals_eq;
  std::vector<double> duals_ineq;
  QpResiduals residuals;
  double objective = 0.0;
  int iterations = 0;
};

struct QpOptions {
  double tol_abs = 1e-8;
  double tol_rel = 1e-8;
  int max_iterations = 0;  // 0 -> derived from problem size
};

double objective_value(const QuadraticProgram& qp, std::span<const double> x);

// Equality-constrained solve; rejects programs with inequality rows.
// Redundant equality rows are dropped when consistent and reported as
// infeasible when not. Zero curvature along the constraint null space with a
// nonzero slope is reported as unbounded, never regularized.
QpSolution solve_eq_qp(const QuadraticProgram& qp, const QpOptions& opts = {});

// Primal active-set iteration over the inequalities; every step is an
// equality solve. Ties break toward the lowest constraint index and the
// iteration cap turns into a max_iterations status.
QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& opts = {});

// Recomputes all three residual norms from the program data alone.
QpResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& solution);

// Plain-text dump: six consecutive triplet blocks (f_quad, f_lin, a_eq,
// b_eq, d_ineq, e_ineq), vectors as n x 1 matrices, 17 significant digits.
void dump_qp(std::ostream& os, const QuadraticProgram& qp);
QuadraticProgram read_qp_dump(std::istream& is);
void dump_qp_file(const std::string& path, const QuadraticProgram& qp);

}  // namespace hfg
