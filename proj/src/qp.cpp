#include "qp.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "error.hpp"

namespace hfg {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// One equality-constrained subproblem: min x^T diag(h) x + g^T x s.t. rows.
struct EqSystem {
  // Rows in triplet form over n variables.
  std::vector<Triplet> rows;
  std::vector<double> rhs;
  int n_rows = 0;

  void add_row(std::span<const Triplet> row_entries, int row, double b) {
    for (const Triplet& t : row_entries) rows.push_back({row, t.col, t.value});
    (void)b;
  }
};

struct EqResult {
  enum class Kind { ok, infeasible, unbounded } kind = Kind::ok;
  VectorXd x;
  VectorXd duals;  // one per input row, dropped rows carry 0
  VectorXd ray;    // unbounded: descent direction inside the constraint null space
};

// Rows of a constraint block in compressed form for fast per-row access.
struct RowBlock {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> start;  // n_rows + 1
  std::vector<int> col;
  std::vector<double> val;

  static RowBlock from_sparse(const SparseMatrix& m) {
    RowBlock b;
    b.n_rows = m.rows();
    b.n_cols = m.cols();
    std::vector<Triplet> ts = m.entries();
    std::sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& c) {
      return a.row != c.row ? a.row < c.row : a.col < c.col;
    });
    b.start.assign(static_cast<size_t>(b.n_rows) + 1, 0);
    for (const Triplet& t : ts) ++b.start[static_cast<size_t>(t.row) + 1];
    for (size_t i = 1; i < b.start.size(); ++i) b.start[i] += b.start[i - 1];
    b.col.reserve(ts.size());
    b.val.reserve(ts.size());
    for (const Triplet& t : ts) {
      b.col.push_back(t.col);
      b.val.push_back(t.value);
    }
    return b;
  }

  double dot_row(int r, const VectorXd& x) const {
    double s = 0.0;
    for (int i = start[static_cast<size_t>(r)]; i < start[static_cast<size_t>(r) + 1]; ++i) {
      s += val[static_cast<size_t>(i)] * x[col[static_cast<size_t>(i)]];
    }
    return s;
  }
};

class EqSolver {
public:
  EqSolver(int n, std::span<const double> h, double tol) : n_(n), h_(n), tol_(tol) {
    strictly_convex_ = true;
    for (int i = 0; i < n; ++i) {
      h_[i] = h[static_cast<size_t>(i)];
      if (!(h_[i] > 0.0)) strictly_convex_ = false;
    }
  }

  // rows: triplets over n_ variables, m rows total, right-hand side b.
  EqResult solve(const std::vector<Triplet>& rows, int m, const VectorXd& b,
                 const VectorXd& g) const {
    // Rows without entries are trivially redundant or inconsistent.
    std::vector<char> has_entry(static_cast<size_t>(m), 0);
    for (const Triplet& t : rows) has_entry[static_cast<size_t>(t.row)] = 1;
    const double feas_tol = tol_ * (1.0 + inf_norm(b));
    std::vector<int> kept;
    kept.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      if (has_entry[static_cast<size_t>(i)]) {
        kept.push_back(i);
      } else if (std::fabs(b[i]) > feas_tol) {
        EqResult r;
        r.kind = EqResult::Kind::infeasible;
        return r;
      }
    }
    std::vector<int> row_map(static_cast<size_t>(m), -1);
    for (size_t i = 0; i < kept.size(); ++i) row_map[static_cast<size_t>(kept[i])] = static_cast<int>(i);
    const int mk = static_cast<int>(kept.size());
    std::vector<Triplet> kept_rows;
    kept_rows.reserve(rows.size());
    for (const Triplet& t : rows) {
      kept_rows.push_back({row_map[static_cast<size_t>(t.row)], t.col, t.value});
    }
    VectorXd bk(mk);
    for (int i = 0; i < mk; ++i) bk[i] = b[kept[static_cast<size_t>(i)]];

    EqResult res;
    if (strictly_convex_ && try_sparse(kept_rows, mk, bk, g, res)) {
      return expand_duals(res, row_map, m);
    }
    res = dense_solve(kept_rows, mk, bk, g);
    return expand_duals(res, row_map, m);
  }

private:
  static EqResult expand_duals(EqResult r, const std::vector<int>& row_map, int m) {
    if (r.kind != EqResult::Kind::ok) return r;
    VectorXd full = VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      if (row_map[static_cast<size_t>(i)] >= 0) full[i] = r.duals[row_map[static_cast<size_t>(i)]];
    }
    r.duals = std::move(full);
    return r;
  }

  bool try_sparse(const std::vector<Triplet>& rows, int m, const VectorXd& b, const VectorXd& g,
                  EqResult& out) const {
    if (m == 0) {
      out.kind = EqResult::Kind::ok;
      out.x = VectorXd(n_);
      for (int i = 0; i < n_; ++i) out.x[i] = -g[i] / (2.0 * h_[i]);
      out.duals = VectorXd(0);
      return true;
    }
    std::vector<Eigen::Triplet<double>> kkt;
    kkt.reserve(static_cast<size_t>(n_) + 2 * rows.size());
    for (int i = 0; i < n_; ++i) kkt.emplace_back(i, i, 2.0 * h_[i]);
    for (const Triplet& t : rows) {
      kkt.emplace_back(n_ + t.row, t.col, t.value);
      kkt.emplace_back(t.col, n_ + t.row, t.value);
    }
    SpMat K(n_ + m, n_ + m);
    K.setFromTriplets(kkt.begin(), kkt.end());
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.isSymmetric(false);
    lu.compute(K);
    if (lu.info() != Eigen::Success) return false;
    VectorXd rhs(n_ + m);
    for (int i = 0; i < n_; ++i) rhs[i] = -g[i];
    for (int i = 0; i < m; ++i) rhs[n_ + i] = b[i];
    VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) return false;
    out.x = sol.head(n_);
    out.duals = sol.tail(m);
    // Verify before trusting the factorization: near-singular systems slip
    // through SparseLU without an error code.
    VectorXd ax = VectorXd::Zero(m);
    VectorXd atl = VectorXd::Zero(n_);
    for (const Triplet& t : rows) {
      ax[t.row] += t.value * out.x[t.col];
      atl[t.col] += t.value * out.duals[t.row];
    }
    const double feas = inf_norm(VectorXd(ax - b));
    VectorXd stat(n_);
    for (int i = 0; i < n_; ++i) stat[i] = 2.0 * h_[i] * out.x[i] + g[i] + atl[i];
    const double feas_scale = 1.0 + inf_norm(b);
    const double stat_scale = 1.0 + inf_norm(g);
    if (feas > tol_ * feas_scale || inf_norm(stat) > tol_ * stat_scale) return false;
    out.kind = EqResult::Kind::ok;
    return true;
  }

  EqResult dense_solve(const std::vector<Triplet>& rows, int m, const VectorXd& b,
                       const VectorXd& g) const {
    EqResult out;
    MatrixXd A = MatrixXd::Zero(m, n_);
    for (const Triplet& t : rows) A(t.row, t.col) = t.value;

    // Row equilibration stabilizes rank decisions; duals are recovered
    // against the original rows below.
    MatrixXd As = A;
    VectorXd bs = b;
    for (int i = 0; i < m; ++i) {
      const double s = As.row(i).cwiseAbs().maxCoeff();
      if (s > 0.0) {
        As.row(i) /= s;
        bs[i] /= s;
      }
    }

    VectorXd x0;
    MatrixXd Z;
    int kernel_dim = n_;
    if (m > 0) {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(As);
      x0 = cod.solve(bs);
      const double feas = inf_norm(VectorXd(As * x0 - bs));
      if (feas > tol_ * (1.0 + inf_norm(bs))) {
        out.kind = EqResult::Kind::infeasible;
        return out;
      }
      Eigen::FullPivLU<MatrixXd> lu(As);
      kernel_dim = static_cast<int>(lu.dimensionOfKernel());
      if (kernel_dim > 0) Z = lu.kernel();
    } else {
      x0 = VectorXd::Zero(n_);
      Z = MatrixXd::Identity(n_, n_);
    }

    VectorXd x = x0;
    if (kernel_dim > 0) {
      VectorXd g0(n_);
      for (int i = 0; i < n_; ++i) g0[i] = 2.0 * h_[i] * x0[i] + g[i];
      MatrixXd HZ = Z;
      for (int i = 0; i < n_; ++i) HZ.row(i) *= 2.0 * h_[i];
      MatrixXd G = Z.transpose() * HZ;
      VectorXd rhs = -(Z.transpose() * g0);
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> codg(G);
      VectorXd v = codg.solve(rhs);
      const double resid = inf_norm(VectorXd(G * v - rhs));
      if (resid > tol_ * (1.0 + inf_norm(rhs))) {
        // Flat curvature with slope: descend along the kernel component of
        // the reduced gradient.
        Eigen::FullPivLU<MatrixXd> lug(G);
        if (lug.dimensionOfKernel() == 0) {
          throw Error(ErrorKind::solver, "reduced system inconsistent without a kernel");
        }
        MatrixXd KG = lug.kernel();
        int best = 0;
        double best_dot = 0.0;
        for (int j = 0; j < KG.cols(); ++j) {
          const double d = std::fabs(KG.col(j).dot(rhs));
          if (d > best_dot) {
            best_dot = d;
            best = j;
          }
        }
        VectorXd w = KG.col(best);
        // Descent: d(obj)/dt along Z w equals -rhs . w, pick the sign that
        // makes it negative.
        if (rhs.dot(w) < 0.0) w = -w;
        VectorXd ray = Z * w;
        const double nrm = inf_norm(ray);
        if (nrm > 0.0) ray /= nrm;
        out.kind = EqResult::Kind::unbounded;
        out.x = x0;
        out.ray = ray;
        return out;
      }
      x = x0 + Z * v;
    }

    out.kind = EqResult::Kind::ok;
    out.x = x;
    if (m > 0) {
      VectorXd gx(n_);
      for (int i = 0; i < n_; ++i) gx[i] = 2.0 * h_[i] * x[i] + g[i];
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> codt(MatrixXd(A.transpose()));
      out.duals = codt.solve(VectorXd(-gx));
    } else {
      out.duals = VectorXd(0);
    }
    return out;
  }

  int n_;
  VectorXd h_;
  double tol_;
  bool strictly_convex_;
};

struct ActiveSetInput {
  int n = 0;
  VectorXd h;
  VectorXd f;
  std::vector<Triplet> eq_rows;
  int n_eq = 0;
  VectorXd b_eq;
  RowBlock ineq;
  VectorXd e;
};

struct ActiveSetOutput {
  QpStatus status = QpStatus::max_iterations;
  VectorXd x;
  VectorXd duals_eq;
  VectorXd duals_ineq;
  int iterations = 0;
};

// Primal active-set loop. `x` must satisfy the equalities exactly enough and
// the inequalities up to feas_tol.
ActiveSetOutput active_set_loop(const ActiveSetInput& in, VectorXd x, const QpOptions& opts,
                                int max_iter) {
  const double tol = opts.tol_abs;
  const double feas_tol = tol * (1.0 + inf_norm(in.e));
  const double act_tol = 10.0 * feas_tol;
  EqSolver solver(in.n, std::span<const double>(in.h.data(), static_cast<size_t>(in.n)),
                  opts.tol_abs);

  const int p = in.ineq.n_rows;
  std::set<int> working;
  for (int j = 0; j < p; ++j) {
    if (in.ineq.dot_row(j, x) - in.e[j] >= -act_tol) working.insert(j);
  }

  ActiveSetOutput out;
  for (int iter = 1; iter <= max_iter; ++iter) {
    out.iterations = iter;

    // Subproblem rows: equalities then the working inequalities, rhs 0.
    std::vector<Triplet> rows = in.eq_rows;
    int m = in.n_eq;
    std::vector<int> working_rows(working.begin(), working.end());
    for (int j : working_rows) {
      for (int i = in.ineq.start[static_cast<size_t>(j)];
           i < in.ineq.start[static_cast<size_t>(j) + 1]; ++i) {
        rows.push_back({m, in.ineq.col[static_cast<size_t>(i)], in.ineq.val[static_cast<size_t>(i)]});
      }
      ++m;
    }
    VectorXd g(in.n);
    for (int i = 0; i < in.n; ++i) g[i] = 2.0 * in.h[i] * x[i] + in.f[i];
    EqResult sub = solver.solve(rows, m, VectorXd::Zero(m), g);
    if (sub.kind == EqResult::Kind::infeasible) {
      throw Error(ErrorKind::solver, "active-set subproblem with zero right-hand side infeasible");
    }

    VectorXd direction;
    bool ray_step = false;
    if (sub.kind == EqResult::Kind::unbounded) {
      direction = sub.ray;
      ray_step = true;
    } else {
      direction = sub.x;
    }

    const double step_norm = inf_norm(direction);
    if (!ray_step && step_norm <= tol * (1.0 + inf_norm(VectorXd(x)))) {
      // Stationary on the working set: check the inequality duals.
      int drop = -1;
      for (int idx = 0; idx < static_cast<int>(working_rows.size()); ++idx) {
        const double mu = sub.duals[in.n_eq + idx];
        if (mu < -10.0 * tol) {
          drop = working_rows[static_cast<size_t>(idx)];
          break;  // lowest constraint index first
        }
      }
      if (drop < 0) {
        out.status = QpStatus::optimal;
        out.x = x;
        out.duals_eq = sub.duals.head(in.n_eq);
        out.duals_ineq = VectorXd::Zero(p);
        for (int idx = 0; idx < static_cast<int>(working_rows.size()); ++idx) {
          double mu = sub.duals[in.n_eq + idx];
          out.duals_ineq[working_rows[static_cast<size_t>(idx)]] = std::max(mu, 0.0);
        }
        return out;
      }
      working.erase(drop);
      continue;
    }

    // Longest feasible step along the direction; a blocking constraint
    // enters the working set (ties resolved toward the lowest index).
    double alpha = ray_step ? std::numeric_limits<double>::infinity() : 1.0;
    int blocker = -1;
    for (int j = 0; j < p; ++j) {
      if (working.count(j)) continue;
      const double denom = in.ineq.dot_row(j, direction);
      if (denom <= tol) continue;
      double t = (in.e[j] - in.ineq.dot_row(j, x)) / denom;
      if (t < 0.0) t = 0.0;
      if (t < alpha - 1e-15) {
        alpha = t;
        blocker = j;
      }
    }
    if (ray_step && blocker < 0) {
      out.status = QpStatus::unbounded;
      out.x = x;
      out.duals_eq = VectorXd::Zero(in.n_eq);
      out.duals_ineq = VectorXd::Zero(p);
      return out;
    }
    x += alpha * direction;
    if (blocker >= 0) working.insert(blocker);
  }

  out.status = QpStatus::max_iterations;
  out.x = x;
  out.duals_eq = VectorXd::Zero(in.n_eq);
  out.duals_ineq = VectorXd::Zero(p);
  return out;
}

VectorXd to_eigen(std::span<const double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

std::vector<double> from_eigen(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

int default_max_iterations(const QuadraticProgram& qp) {
  return 100 + 10 * (qp.n() + qp.d_ineq.rows() + qp.a_eq.rows());
}

QpSolution finish(const QuadraticProgram& qp, QpStatus status, const VectorXd& x,
                  const VectorXd& duals_eq, const VectorXd& duals_ineq, int iterations) {
  QpSolution sol;
  sol.status = status;
  sol.x = from_eigen(x);
  sol.duals_eq = from_eigen(duals_eq);
  sol.duals_ineq = from_eigen(duals_ineq);
  sol.iterations = iterations;
  if (status == QpStatus::optimal) {
    sol.objective = objective_value(qp, sol.x);
    sol.residuals = kkt_residuals(qp, sol);
  }
  return sol;
}

}  // namespace

void QuadraticProgram::validate() const {
  const int nv = n();
  if (static_cast<int>(f_lin.size()) != nv) {
    throw Error(ErrorKind::argument, "f_lin length does not match f_quad");
  }
  for (double h : f_quad) {
    if (h < 0.0 || !std::isfinite(h)) {
      throw Error(ErrorKind::argument, "f_quad must be nonnegative and finite");
    }
  }
  for (double v : f_lin) {
    if (!std::isfinite(v)) throw Error(ErrorKind::argument, "f_lin must be finite");
  }
  if (a_eq.cols() != nv && !(a_eq.rows() == 0 && a_eq.cols() == 0)) {
    throw Error(ErrorKind::argument, "a_eq column count does not match variable count");
  }
  if (static_cast<int>(b_eq.size()) != a_eq.rows()) {
    throw Error(ErrorKind::argument, "b_eq length does not match a_eq row count");
  }
  if (d_ineq.cols() != nv && !(d_ineq.rows() == 0 && d_ineq.cols() == 0)) {
    throw Error(ErrorKind::argument, "d_ineq column count does not match variable count");
  }
  if (static_cast<int>(e_ineq.size()) != d_ineq.rows()) {
    throw Error(ErrorKind::argument, "e_ineq length does not match d_ineq row count");
  }
}

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::unbounded: return "unbounded";
    case QpStatus::max_iterations: return "max_iterations";
  }
  return "max_iterations";
}

double objective_value(const QuadraticProgram& qp, std::span<const double> x) {
  double z = 0.0;
  for (int i = 0; i < qp.n(); ++i) {
    const double xi = x[static_cast<size_t>(i)];
    z += qp.f_quad[static_cast<size_t>(i)] * xi * xi + qp.f_lin[static_cast<size_t>(i)] * xi;
  }
  return z;
}

QpSolution solve_eq_qp(const QuadraticProgram& qp, const QpOptions& opts) {
  qp.validate();
  if (qp.d_ineq.rows() != 0) {
    throw Error(ErrorKind::argument, "solve_eq_qp requires a program without inequalities");
  }
  EqSolver solver(qp.n(), qp.f_quad, opts.tol_abs);
  EqResult r = solver.solve(qp.a_eq.entries(), qp.a_eq.rows(), to_eigen(qp.b_eq),
                            to_eigen(qp.f_lin));
  switch (r.kind) {
    case EqResult::Kind::infeasible:
      return finish(qp, QpStatus::infeasible, VectorXd::Zero(qp.n()),
                    VectorXd::Zero(qp.a_eq.rows()), VectorXd(0), 1);
    case EqResult::Kind::unbounded:
      return finish(qp, QpStatus::unbounded, r.x, VectorXd::Zero(qp.a_eq.rows()), VectorXd(0), 1);
    case EqResult::Kind::ok: break;
  }
  QpSolution sol = finish(qp, QpStatus::optimal, r.x, r.duals, VectorXd(0), 1);
  const double feas_scale = 1.0 + inf_norm(qp.b_eq);
  const double stat_scale = 1.0 + inf_norm(qp.f_lin) + inf_norm(sol.x);
  const double tol = opts.tol_abs + opts.tol_rel;
  if (sol.residuals.feasibility > 100.0 * tol * feas_scale ||
      sol.residuals.stationarity > 100.0 * tol * stat_scale) {
    throw Error(ErrorKind::solver,
                "equality solve residuals exceed tolerance: feasibility " +
                    format_double(sol.residuals.feasibility) + ", stationarity " +
                    format_double(sol.residuals.stationarity));
  }
  return sol;
}

QpSolution solve_qp(const QuadraticProgram& qp, const QpOptions& opts) {
  qp.validate();
  if (qp.d_ineq.rows() == 0) return solve_eq_qp(qp, opts);

  const int n = qp.n();
  const int p = qp.d_ineq.rows();
  const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : default_max_iterations(qp);

  ActiveSetInput in;
  in.n = n;
  in.h = to_eigen(qp.f_quad);
  in.f = to_eigen(qp.f_lin);
  in.eq_rows = qp.a_eq.entries();
  in.n_eq = qp.a_eq.rows();
  in.b_eq = to_eigen(qp.b_eq);
  in.ineq = RowBlock::from_sparse(qp.d_ineq);
  in.e = to_eigen(qp.e_ineq);

  const double feas_tol = opts.tol_abs * (1.0 + inf_norm(qp.e_ineq));

  // Start from the inequality-relaxed optimum when it exists, otherwise from
  // the minimum-norm point on the equalities.
  EqSolver solver(n, qp.f_quad, opts.tol_abs);
  EqResult relaxed = solver.solve(in.eq_rows, in.n_eq, in.b_eq, in.f);
  if (relaxed.kind == EqResult::Kind::infeasible) {
    return finish(qp, QpStatus::infeasible, VectorXd::Zero(n), VectorXd::Zero(in.n_eq),
                  VectorXd::Zero(p), 1);
  }
  VectorXd x;
  if (relaxed.kind == EqResult::Kind::ok) {
    x = relaxed.x;
  } else {
    std::vector<double> ones(static_cast<size_t>(n), 1.0);
    EqSolver norm_solver(n, ones, opts.tol_abs);
    EqResult mn = norm_solver.solve(in.eq_rows, in.n_eq, in.b_eq, VectorXd::Zero(n));
    if (mn.kind != EqResult::Kind::ok) {
      return finish(qp, QpStatus::infeasible, VectorXd::Zero(n), VectorXd::Zero(in.n_eq),
                    VectorXd::Zero(p), 1);
    }
    x = mn.x;
  }

  double worst = 0.0;
  for (int j = 0; j < p; ++j) worst = std::max(worst, in.ineq.dot_row(j, x) - in.e[j]);

  int used_iterations = 0;
  if (worst > feas_tol) {
    // Phase one: slack variables on the violated rows only, objective |s|^2.
    std::vector<int> violated;
    for (int j = 0; j < p; ++j) {
      if (in.ineq.dot_row(j, x) - in.e[j] > feas_tol) violated.push_back(j);
    }
    const int ns = static_cast<int>(violated.size());
    ActiveSetInput ph;
    ph.n = n + ns;
    ph.h = VectorXd::Zero(n + ns);
    for (int i = 0; i < ns; ++i) ph.h[n + i] = 1.0;
    ph.f = VectorXd::Zero(n + ns);
    ph.eq_rows = in.eq_rows;
    ph.n_eq = in.n_eq;
    ph.b_eq = in.b_eq;
    std::vector<Triplet> ineq_rows;
    std::vector<double> e1;
    int r = 0;
    std::vector<int> slack_of(static_cast<size_t>(p), -1);
    for (int i = 0; i < ns; ++i) slack_of[static_cast<size_t>(violated[i])] = i;
    for (int j = 0; j < p; ++j) {
      for (int i = in.ineq.start[static_cast<size_t>(j)];
           i < in.ineq.start[static_cast<size_t>(j) + 1]; ++i) {
        ineq_rows.push_back({r, in.ineq.col[static_cast<size_t>(i)], in.ineq.val[static_cast<size_t>(i)]});
      }
      if (slack_of[static_cast<size_t>(j)] >= 0) {
        ineq_rows.push_back({r, n + slack_of[static_cast<size_t>(j)], -1.0});
      }
      e1.push_back(qp.e_ineq[static_cast<size_t>(j)]);
      ++r;
    }
    for (int i = 0; i < ns; ++i) {
      ineq_rows.push_back({r, n + i, -1.0});
      e1.push_back(0.0);
      ++r;
    }
    ph.ineq = RowBlock::from_sparse(
        SparseMatrix::from_triplets(r, n + ns, std::move(ineq_rows)));
    ph.e = to_eigen(e1);

    VectorXd x1 = VectorXd::Zero(n + ns);
    x1.head(n) = x;
    for (int i = 0; i < ns; ++i) {
      x1[n + i] = std::max(0.0, in.ineq.dot_row(violated[static_cast<size_t>(i)], x) -
                                    in.e[violated[static_cast<size_t>(i)]]);
    }
    ActiveSetOutput ph_out = active_set_loop(ph, x1, opts, max_iter);
    used_iterations = ph_out.iterations;
    if (ph_out.status == QpStatus::max_iterations) {
      return finish(qp, QpStatus::max_iterations, ph_out.x.head(n), VectorXd::Zero(in.n_eq),
                    VectorXd::Zero(p), used_iterations);
    }
    double smax = 0.0;
    for (int i = 0; i < ns; ++i) smax = std::max(smax, ph_out.x[n + i]);
    if (smax > 10.0 * feas_tol) {
      return finish(qp, QpStatus::infeasible, ph_out.x.head(n), VectorXd::Zero(in.n_eq),
                    VectorXd::Zero(p), used_iterations);
    }
    x = ph_out.x.head(n);
  }

  ActiveSetOutput out = active_set_loop(in, x, opts, max_iter);
  out.iterations += used_iterations;
  return finish(qp, out.status, out.x, out.duals_eq, out.duals_ineq, out.iterations);
}

QpResiduals kkt_residuals(const QuadraticProgram& qp, const QpSolution& solution) {
  QpResiduals r;
  const std::vector<double>& x = solution.x;
  std::vector<double> ax = qp.a_eq.multiply(x);
  for (size_t i = 0; i < ax.size(); ++i) {
    r.feasibility = std::max(r.feasibility, std::fabs(ax[i] - qp.b_eq[i]));
  }
  std::vector<double> dx = qp.d_ineq.multiply(x);
  for (size_t j = 0; j < dx.size(); ++j) {
    const double slack = dx[j] - qp.e_ineq[j];
    r.feasibility = std::max(r.feasibility, slack);
    if (j < solution.duals_ineq.size()) {
      r.complementarity = std::max(r.complementarity, std::fabs(solution.duals_ineq[j] * slack));
    }
  }
  std::vector<double> grad(static_cast<size_t>(qp.n()), 0.0);
  for (int i = 0; i < qp.n(); ++i) {
    grad[static_cast<size_t>(i)] = 2.0 * qp.f_quad[static_cast<size_t>(i)] * x[static_cast<size_t>(i)] +
                                   qp.f_lin[static_cast<size_t>(i)];
  }
  if (!solution.duals_eq.empty()) {
    std::vector<double> atl = qp.a_eq.multiply_transposed(solution.duals_eq);
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += atl[i];
  }
  if (!solution.duals_ineq.empty()) {
    std::vector<double> dtm = qp.d_ineq.multiply_transposed(solution.duals_ineq);
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += dtm[i];
  }
  r.stationarity = inf_norm(grad);
  return r;
}

namespace {

SparseMatrix vector_block(const std::vector<double>& v) {
  std::vector<Triplet> t;
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) t.push_back({static_cast<int>(i), 0, v[i]});
  }
  return SparseMatrix::from_triplets(static_cast<int>(v.size()), 1, std::move(t));
}

std::vector<double> vector_from_block(const SparseMatrix& m) {
  std::vector<double> v(static_cast<size_t>(m.rows()), 0.0);
  for (const Triplet& t : m.entries()) v[static_cast<size_t>(t.row)] = t.value;
  return v;
}

}  // namespace

void dump_qp(std::ostream& os, const QuadraticProgram& qp) {
  write_triplet_block(os, vector_block(qp.f_quad));
  write_triplet_block(os, vector_block(qp.f_lin));
  write_triplet_block(os, qp.a_eq);
  write_triplet_block(os, vector_block(qp.b_eq));
  write_triplet_block(os, qp.d_ineq);
  write_triplet_block(os, vector_block(qp.e_ineq));
}

QuadraticProgram read_qp_dump(std::istream& is) {
  QuadraticProgram qp;
  qp.f_quad = vector_from_block(read_triplet_block(is));
  qp.f_lin = vector_from_block(read_triplet_block(is));
  qp.a_eq = read_triplet_block(is);
  qp.b_eq = vector_from_block(read_triplet_block(is));
  qp.d_ineq = read_triplet_block(is);
  qp.e_ineq = vector_from_block(read_triplet_block(is));
  qp.validate();
  return qp;
}

void dump_qp_file(const std::string& path, const QuadraticProgram& qp) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  dump_qp(os, qp);
  if (!os.good()) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace hfg
