#include "hfnmcf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "error.hpp"

namespace hfg {

namespace {

std::vector<std::vector<std::pair<int, double>>> rows_of(const SparseMatrix& m) {
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(m.rows()));
  for (const Triplet& t : m.entries()) {
    rows[static_cast<size_t>(t.row)].push_back({t.col, t.value});
  }
  return rows;
}

std::string id_or(const std::vector<std::string>& ids, int i, const char* prefix) {
  if (i >= 0 && i < static_cast<int>(ids.size())) return ids[static_cast<size_t>(i)];
  return std::string(prefix) + std::to_string(i);
}

void check_size(size_t actual, size_t expected, const std::string& what) {
  if (actual != expected) {
    throw Error(ErrorKind::argument, what + " has length " + std::to_string(actual) +
                                         ", expected " + std::to_string(expected));
  }
}

std::vector<double> zeros_or(const std::vector<double>& v, size_t n, const std::string& what) {
  if (v.empty()) return std::vector<double>(n, 0.0);
  check_size(v.size(), n, what);
  return v;
}

void check_binary(const SparseMatrix& m, const std::string& what) {
  for (const Triplet& t : m.entries()) {
    if (t.value != 1.0) {
      throw Error(ErrorKind::argument, what + " must contain only 0/1 entries");
    }
  }
}

void check_boundary(const FiringBoundary& b, int n_transitions, int horizon,
                    const std::string& what) {
  if (b.empty()) return;
  if (b.selector.cols() != n_transitions) {
    throw Error(ErrorKind::argument, what + " selector has " + std::to_string(b.selector.cols()) +
                                         " columns, expected " + std::to_string(n_transitions));
  }
  check_size(b.values.size(), static_cast<size_t>(horizon), what + " values");
  for (const std::vector<double>& v : b.values) {
    check_size(v.size(), static_cast<size_t>(b.selector.rows()), what + " value row");
  }
}

class Assembler {
public:
  explicit Assembler(const DecisionLayout& layout) : layout_(layout) {}

  void begin_row(std::string block, int k, std::string entity, double rhs) {
    info_.push_back({std::move(block), k, std::move(entity)});
    rhs_.push_back(rhs);
  }

  void coeff(int col, double value) {
    if (value != 0.0) triplets_.push_back({static_cast<int>(rhs_.size()) - 1, col, value});
  }

  SparseMatrix matrix() const {
    return SparseMatrix::from_triplets(static_cast<int>(rhs_.size()), layout_.total(),
                                       std::vector<Triplet>(triplets_));
  }
  const std::vector<double>& rhs() const { return rhs_; }
  std::vector<RowInfo> take_info() { return std::move(info_); }

private:
  const DecisionLayout& layout_;
  std::vector<Triplet> triplets_;
  std::vector<double> rhs_;
  std::vector<RowInfo> info_;
};

}  // namespace

DecisionLayout make_layout(const HfnmcfInstance& instance) {
  if (instance.horizon < 1) throw Error(ErrorKind::argument, "horizon must be at least 1");
  DecisionLayout l;
  l.horizon = instance.horizon;
  l.n_places = instance.esn.n_places();
  l.n_transitions = instance.esn.n_transitions();
  for (const OperandNet& net : instance.operand_nets) {
    l.op_place_offset.push_back(l.n_op_places);
    l.op_trans_offset.push_back(l.n_op_transitions);
    l.operand_places.push_back(net.n_places());
    l.operand_transitions.push_back(net.n_transitions());
    l.n_op_places += net.n_places();
    l.n_op_transitions += net.n_transitions();
  }
  l.off_q_e = l.n_places;
  l.off_q_sl = l.off_q_e + l.n_transitions;
  l.off_q_el = l.off_q_sl + l.n_op_places;
  l.off_u_minus = l.off_q_el + l.n_op_transitions;
  l.off_u_plus = l.off_u_minus + l.n_transitions;
  l.off_u_l_minus = l.off_u_plus + l.n_transitions;
  l.off_u_l_plus = l.off_u_l_minus + l.n_op_transitions;
  l.step_stride = l.off_u_l_plus + l.n_op_transitions;
  return l;
}

AssembledProgram assemble_hfnmcf(const HfnmcfInstance& instance) {
  const EngineeringSystemNet& esn = instance.esn;
  const int K = instance.horizon;
  const int nt = esn.n_transitions();
  const int np = esn.n_places();
  check_size(esn.durations.size(), static_cast<size_t>(nt), "engineering system net durations");

  const DecisionLayout layout = make_layout(instance);

  if (!instance.operand_nets.empty()) {
    if (instance.sync.lambda_plus.rows() != layout.n_op_transitions ||
        instance.sync.lambda_plus.cols() != nt || instance.sync.lambda_minus.rows() != layout.n_op_transitions ||
        instance.sync.lambda_minus.cols() != nt) {
      throw Error(ErrorKind::argument,
                  "synchronization matrices must be (total operand transitions) x (system transitions)");
    }
    check_binary(instance.sync.lambda_plus, "synchronization matrix");
    check_binary(instance.sync.lambda_minus, "synchronization matrix");
    check_size(instance.operand_boundaries.size(), instance.operand_nets.size(),
               "operand boundary list");
  } else if (instance.sync.lambda_plus.nnz() != 0 || instance.sync.lambda_minus.nnz() != 0) {
    throw Error(ErrorKind::argument, "synchronization matrices given without operand nets");
  }

  check_boundary(instance.out_boundary, nt, K, "output boundary");
  check_boundary(instance.in_boundary, nt, K, "input boundary");
  for (size_t i = 0; i < instance.operand_boundaries.size(); ++i) {
    const int nti = instance.operand_nets[i].n_transitions();
    check_boundary(instance.operand_boundaries[i].out, nti, K,
                   "operand '" + instance.operand_nets[i].operand + "' output boundary");
    check_boundary(instance.operand_boundaries[i].in, nti, K,
                   "operand '" + instance.operand_nets[i].operand + "' input boundary");
  }

  const std::vector<double> c_b1 = zeros_or(instance.c_b1, static_cast<size_t>(np), "initial place marking");
  const std::vector<double> c_e1 = zeros_or(instance.c_e1, static_cast<size_t>(nt), "initial transition marking");
  const std::vector<double> c_sl1 =
      zeros_or(instance.c_sl1, static_cast<size_t>(layout.n_op_places), "initial operand marking");
  const std::vector<double> c_bK = zeros_or(instance.c_bK, static_cast<size_t>(np), "final place marking");
  const std::vector<double> c_eK = zeros_or(instance.c_eK, static_cast<size_t>(nt), "final transition marking");
  const std::vector<double> c_slK =
      zeros_or(instance.c_slK, static_cast<size_t>(layout.n_op_places), "final operand marking");

  const double dt = esn.dt;
  const auto mp_rows = rows_of(esn.m_plus);
  const auto mm_rows = rows_of(esn.m_minus);

  Assembler eq(layout);

  // Place marking balance.
  for (int k = 1; k <= K; ++k) {
    for (int p = 0; p < np; ++p) {
      eq.begin_row("place_balance", k, id_or(esn.place_ids, p, "place"), 0.0);
      eq.coeff(layout.q_b(k, p), 1.0);
      eq.coeff(layout.q_b(k + 1, p), -1.0);
      for (const auto& [t, w] : mp_rows[static_cast<size_t>(p)]) eq.coeff(layout.u_plus(k, t), w * dt);
      for (const auto& [t, w] : mm_rows[static_cast<size_t>(p)]) eq.coeff(layout.u_minus(k, t), -w * dt);
    }
  }
  // Transition marking balance.
  for (int k = 1; k <= K; ++k) {
    for (int t = 0; t < nt; ++t) {
      eq.begin_row("transition_balance", k, id_or(esn.transition_ids, t, "transition"), 0.0);
      eq.coeff(layout.q_e(k, t), 1.0);
      eq.coeff(layout.q_e(k + 1, t), -1.0);
      eq.coeff(layout.u_minus(k, t), dt);
      eq.coeff(layout.u_plus(k, t), -dt);
    }
  }
  // Transition duration: output firing lags input firing by the duration.
  for (int k = 1; k <= K; ++k) {
    for (int t = 0; t < nt; ++t) {
      const int kd = esn.durations[static_cast<size_t>(t)];
      if (k + kd > K) continue;
      eq.begin_row("duration_link", k, id_or(esn.transition_ids, t, "transition"), 0.0);
      eq.coeff(layout.u_minus(k, t), 1.0);
      eq.coeff(layout.u_plus(k + kd, t), -1.0);
    }
  }
  // Operand net balances and durations.
  for (int k = 1; k <= K; ++k) {
    for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
      const OperandNet& net = instance.operand_nets[i];
      const auto op_mp = rows_of(net.m_plus);
      const auto op_mm = rows_of(net.m_minus);
      for (int p = 0; p < net.n_places(); ++p) {
        eq.begin_row("operand_place_balance", k,
                     net.operand + ":" + id_or(net.place_ids, p, "place"), 0.0);
        eq.coeff(layout.q_sl(k, static_cast<int>(i), p), 1.0);
        eq.coeff(layout.q_sl(k + 1, static_cast<int>(i), p), -1.0);
        for (const auto& [t, w] : op_mp[static_cast<size_t>(p)]) {
          eq.coeff(layout.u_l_plus(k, static_cast<int>(i), t), w * dt);
        }
        for (const auto& [t, w] : op_mm[static_cast<size_t>(p)]) {
          eq.coeff(layout.u_l_minus(k, static_cast<int>(i), t), -w * dt);
        }
      }
    }
  }
  for (int k = 1; k <= K; ++k) {
    for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
      const OperandNet& net = instance.operand_nets[i];
      for (int t = 0; t < net.n_transitions(); ++t) {
        eq.begin_row("operand_transition_balance", k,
                     net.operand + ":" + id_or(net.transition_ids, t, "transition"), 0.0);
        eq.coeff(layout.q_el(k, static_cast<int>(i), t), 1.0);
        eq.coeff(layout.q_el(k + 1, static_cast<int>(i), t), -1.0);
        eq.coeff(layout.u_l_minus(k, static_cast<int>(i), t), dt);
        eq.coeff(layout.u_l_plus(k, static_cast<int>(i), t), -dt);
      }
    }
  }
  for (int k = 1; k <= K; ++k) {
    for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
      const OperandNet& net = instance.operand_nets[i];
      check_size(net.durations.size(), static_cast<size_t>(net.n_transitions()),
                 "operand net durations");
      for (int t = 0; t < net.n_transitions(); ++t) {
        const int kd = net.durations[static_cast<size_t>(t)];
        if (k + kd > K) continue;
        eq.begin_row("operand_duration_link", k,
                     net.operand + ":" + id_or(net.transition_ids, t, "transition"), 0.0);
        eq.coeff(layout.u_l_minus(k, static_cast<int>(i), t), 1.0);
        eq.coeff(layout.u_l_plus(k + kd, static_cast<int>(i), t), -1.0);
      }
    }
  }
  // Synchronization of operand-net firings to system-net firings.
  if (!instance.operand_nets.empty()) {
    const auto lp_rows = rows_of(instance.sync.lambda_plus);
    const auto lm_rows = rows_of(instance.sync.lambda_minus);
    for (int k = 1; k <= K; ++k) {
      for (int r = 0; r < layout.n_op_transitions; ++r) {
        eq.begin_row("sync_out", k, "row" + std::to_string(r), 0.0);
        eq.coeff((k - 1) * layout.step_stride + layout.off_u_l_plus + r, 1.0);
        for (const auto& [t, w] : lp_rows[static_cast<size_t>(r)]) eq.coeff(layout.u_plus(k, t), -w);
      }
      for (int r = 0; r < layout.n_op_transitions; ++r) {
        eq.begin_row("sync_in", k, "row" + std::to_string(r), 0.0);
        eq.coeff((k - 1) * layout.step_stride + layout.off_u_l_minus + r, 1.0);
        for (const auto& [t, w] : lm_rows[static_cast<size_t>(r)]) eq.coeff(layout.u_minus(k, t), -w);
      }
    }
  }
  // Exogenous boundary data on system-net firings.
  for (int k = 1; k <= K; ++k) {
    if (!instance.out_boundary.empty()) {
      const auto rows = rows_of(instance.out_boundary.selector);
      for (int r = 0; r < instance.out_boundary.selector.rows(); ++r) {
        eq.begin_row("boundary_out", k, "row" + std::to_string(r),
                     instance.out_boundary.values[static_cast<size_t>(k - 1)][static_cast<size_t>(r)]);
        for (const auto& [t, w] : rows[static_cast<size_t>(r)]) eq.coeff(layout.u_plus(k, t), w);
      }
    }
    if (!instance.in_boundary.empty()) {
      const auto rows = rows_of(instance.in_boundary.selector);
      for (int r = 0; r < instance.in_boundary.selector.rows(); ++r) {
        eq.begin_row("boundary_in", k, "row" + std::to_string(r),
                     instance.in_boundary.values[static_cast<size_t>(k - 1)][static_cast<size_t>(r)]);
        for (const auto& [t, w] : rows[static_cast<size_t>(r)]) eq.coeff(layout.u_minus(k, t), w);
      }
    }
  }
  // Exogenous boundary data on operand-net firings.
  for (int k = 1; k <= K; ++k) {
    for (size_t i = 0; i < instance.operand_boundaries.size(); ++i) {
      const OperandBoundary& ob = instance.operand_boundaries[i];
      const std::string& op = instance.operand_nets[i].operand;
      if (!ob.out.empty()) {
        const auto rows = rows_of(ob.out.selector);
        for (int r = 0; r < ob.out.selector.rows(); ++r) {
          eq.begin_row("operand_boundary_out", k, op + ":row" + std::to_string(r),
                       ob.out.values[static_cast<size_t>(k - 1)][static_cast<size_t>(r)]);
          for (const auto& [t, w] : rows[static_cast<size_t>(r)]) {
            eq.coeff(layout.u_l_plus(k, static_cast<int>(i), t), w);
          }
        }
      }
      if (!ob.in.empty()) {
        const auto rows = rows_of(ob.in.selector);
        for (int r = 0; r < ob.in.selector.rows(); ++r) {
          eq.begin_row("operand_boundary_in", k, op + ":row" + std::to_string(r),
                       ob.in.values[static_cast<size_t>(k - 1)][static_cast<size_t>(r)]);
          for (const auto& [t, w] : rows[static_cast<size_t>(r)]) {
            eq.coeff(layout.u_l_minus(k, static_cast<int>(i), t), w);
          }
        }
      }
    }
  }
  // Initial conditions at step 1.
  for (int p = 0; p < np; ++p) {
    eq.begin_row("initial_condition", 1, id_or(esn.place_ids, p, "place"), c_b1[static_cast<size_t>(p)]);
    eq.coeff(layout.q_b(1, p), 1.0);
  }
  for (int t = 0; t < nt; ++t) {
    eq.begin_row("initial_condition", 1, id_or(esn.transition_ids, t, "transition"),
                 c_e1[static_cast<size_t>(t)]);
    eq.coeff(layout.q_e(1, t), 1.0);
  }
  {
    int idx = 0;
    for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
      const OperandNet& net = instance.operand_nets[i];
      for (int p = 0; p < net.n_places(); ++p, ++idx) {
        eq.begin_row("initial_condition", 1, net.operand + ":" + id_or(net.place_ids, p, "place"),
                     c_sl1[static_cast<size_t>(idx)]);
        eq.coeff(layout.q_sl(1, static_cast<int>(i), p), 1.0);
      }
    }
  }
  // Final conditions at step K+1.
  for (int p = 0; p < np; ++p) {
    eq.begin_row("final_condition", K + 1, id_or(esn.place_ids, p, "place"),
                 c_bK[static_cast<size_t>(p)]);
    eq.coeff(layout.q_b(K + 1, p), 1.0);
  }
  for (int t = 0; t < nt; ++t) {
    eq.begin_row("final_condition", K + 1, id_or(esn.transition_ids, t, "transition"),
                 c_eK[static_cast<size_t>(t)]);
    eq.coeff(layout.q_e(K + 1, t), 1.0);
  }
  {
    int idx = 0;
    for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
      const OperandNet& net = instance.operand_nets[i];
      for (int p = 0; p < net.n_places(); ++p, ++idx) {
        eq.begin_row("final_condition", K + 1,
                     net.operand + ":" + id_or(net.place_ids, p, "place"),
                     c_slK[static_cast<size_t>(idx)]);
        eq.coeff(layout.q_sl(K + 1, static_cast<int>(i), p), 1.0);
      }
    }
  }
  for (int t = 0; t < nt; ++t) {
    eq.begin_row("final_condition", K + 1, id_or(esn.transition_ids, t, "transition"), 0.0);
    eq.coeff(layout.u_minus(K + 1, t), 1.0);
  }
  for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
    const OperandNet& net = instance.operand_nets[i];
    for (int t = 0; t < net.n_transitions(); ++t) {
      eq.begin_row("final_condition", K + 1,
                   net.operand + ":" + id_or(net.transition_ids, t, "transition"), 0.0);
      eq.coeff(layout.u_l_minus(K + 1, static_cast<int>(i), t), 1.0);
    }
  }

  // Inequalities: per-step capacity rows, then firing nonnegativity.
  Assembler ineq(layout);
  if (instance.d_step.rows() > 0) {
    if (instance.d_step.cols() != layout.step_stride) {
      throw Error(ErrorKind::argument, "per-step capacity rows must have " +
                                           std::to_string(layout.step_stride) + " columns");
    }
    check_size(instance.e_step.size(), static_cast<size_t>(instance.d_step.rows()),
               "capacity right-hand side");
    const auto cap_rows = rows_of(instance.d_step);
    for (int k = 1; k <= K; ++k) {
      for (int r = 0; r < instance.d_step.rows(); ++r) {
        ineq.begin_row("capacity", k, "row" + std::to_string(r),
                       instance.e_step[static_cast<size_t>(r)]);
        for (const auto& [c, w] : cap_rows[static_cast<size_t>(r)]) {
          ineq.coeff((k - 1) * layout.step_stride + c, w);
        }
      }
    }
  }
  if (instance.nonnegative_firings) {
    for (int k = 1; k <= K + 1; ++k) {
      for (int t = 0; t < nt; ++t) {
        ineq.begin_row("nonnegative_firing", k, id_or(esn.transition_ids, t, "transition"), 0.0);
        ineq.coeff(layout.u_minus(k, t), -1.0);
      }
      for (int t = 0; t < nt; ++t) {
        ineq.begin_row("nonnegative_firing", k, id_or(esn.transition_ids, t, "transition"), 0.0);
        ineq.coeff(layout.u_plus(k, t), -1.0);
      }
      for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
        const OperandNet& net = instance.operand_nets[i];
        for (int t = 0; t < net.n_transitions(); ++t) {
          ineq.begin_row("nonnegative_firing", k,
                         net.operand + ":" + id_or(net.transition_ids, t, "transition"), 0.0);
          ineq.coeff(layout.u_l_minus(k, static_cast<int>(i), t), -1.0);
        }
      }
      for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
        const OperandNet& net = instance.operand_nets[i];
        for (int t = 0; t < net.n_transitions(); ++t) {
          ineq.begin_row("nonnegative_firing", k,
                         net.operand + ":" + id_or(net.transition_ids, t, "transition"), 0.0);
          ineq.coeff(layout.u_l_plus(k, static_cast<int>(i), t), -1.0);
        }
      }
    }
  }

  AssembledProgram out;
  out.layout = layout;
  out.qp.f_quad = zeros_or(instance.f_quad, static_cast<size_t>(layout.total()), "quadratic objective");
  out.qp.f_lin = zeros_or(instance.f_lin, static_cast<size_t>(layout.total()), "linear objective");
  out.qp.a_eq = eq.matrix();
  out.qp.b_eq = eq.rhs();
  out.qp.d_ineq = ineq.matrix();
  out.qp.e_ineq = ineq.rhs();
  out.eq_rows = eq.take_info();
  out.ineq_rows = ineq.take_info();
  out.qp.validate();
  return out;
}

void write_provenance_csv(std::ostream& os, const AssembledProgram& program) {
  os << "row,equation,k,entity\n";
  int row = 0;
  for (const RowInfo& r : program.eq_rows) {
    os << row++ << ',' << r.block << ',' << r.k << ',' << r.entity << '\n';
  }
  for (const RowInfo& r : program.ineq_rows) {
    os << row++ << ',' << r.block << ',' << r.k << ',' << r.entity << '\n';
  }
}

ExtractedTrajectories extract_trajectories(const HfnmcfInstance& instance,
                                           const AssembledProgram& program,
                                           const QpSolution& solution) {
  if (solution.status != QpStatus::optimal) {
    throw Error(ErrorKind::argument, std::string("trajectories require an optimal solution, got ") +
                                         to_string(solution.status));
  }
  const DecisionLayout& l = program.layout;
  check_size(solution.x.size(), static_cast<size_t>(l.total()), "solution vector");
  const int K = l.horizon;
  const std::vector<double>& x = solution.x;

  ExtractedTrajectories out;
  for (int k = 1; k <= K + 1; ++k) {
    std::vector<double> qb(static_cast<size_t>(l.n_places));
    for (int p = 0; p < l.n_places; ++p) qb[static_cast<size_t>(p)] = x[static_cast<size_t>(l.q_b(k, p))];
    std::vector<double> qe(static_cast<size_t>(l.n_transitions));
    for (int t = 0; t < l.n_transitions; ++t) qe[static_cast<size_t>(t)] = x[static_cast<size_t>(l.q_e(k, t))];
    out.esn.places.push_back(std::move(qb));
    out.esn.transitions.push_back(std::move(qe));
  }
  for (int k = 1; k <= K; ++k) {
    std::vector<double> um(static_cast<size_t>(l.n_transitions));
    std::vector<double> up(static_cast<size_t>(l.n_transitions));
    for (int t = 0; t < l.n_transitions; ++t) {
      um[static_cast<size_t>(t)] = x[static_cast<size_t>(l.u_minus(k, t))];
      up[static_cast<size_t>(t)] = x[static_cast<size_t>(l.u_plus(k, t))];
    }
    out.esn_schedule.u_minus.push_back(std::move(um));
    out.esn_schedule.u_plus.push_back(std::move(up));
  }
  for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
    Trajectory traj;
    FiringSchedule sched;
    const OperandNet& net = instance.operand_nets[i];
    for (int k = 1; k <= K + 1; ++k) {
      std::vector<double> qs(static_cast<size_t>(net.n_places()));
      for (int p = 0; p < net.n_places(); ++p) {
        qs[static_cast<size_t>(p)] = x[static_cast<size_t>(l.q_sl(k, static_cast<int>(i), p))];
      }
      std::vector<double> qe(static_cast<size_t>(net.n_transitions()));
      for (int t = 0; t < net.n_transitions(); ++t) {
        qe[static_cast<size_t>(t)] = x[static_cast<size_t>(l.q_el(k, static_cast<int>(i), t))];
      }
      traj.places.push_back(std::move(qs));
      traj.transitions.push_back(std::move(qe));
    }
    for (int k = 1; k <= K; ++k) {
      std::vector<double> um(static_cast<size_t>(net.n_transitions()));
      std::vector<double> up(static_cast<size_t>(net.n_transitions()));
      for (int t = 0; t < net.n_transitions(); ++t) {
        um[static_cast<size_t>(t)] = x[static_cast<size_t>(l.u_l_minus(k, static_cast<int>(i), t))];
        up[static_cast<size_t>(t)] = x[static_cast<size_t>(l.u_l_plus(k, static_cast<int>(i), t))];
      }
      sched.u_minus.push_back(std::move(um));
      sched.u_plus.push_back(std::move(up));
    }
    out.operands.push_back(std::move(traj));
    out.operand_schedules.push_back(std::move(sched));
  }

  // Replay through the state-transition functions and record the deviation.
  double residual = 0.0;
  auto compare = [&residual](const std::vector<std::vector<double>>& a,
                             const std::vector<std::vector<double>>& b) {
    for (size_t k = 0; k < a.size(); ++k) {
      for (size_t i = 0; i < a[k].size(); ++i) {
        residual = std::max(residual, std::fabs(a[k][i] - b[k][i]));
      }
    }
  };
  {
    EngineeringSystemNet net = instance.esn;
    net.q_b0 = out.esn.places.front();
    net.q_e0 = out.esn.transitions.front();
    Trajectory replay = simulate(net, out.esn_schedule, K);
    compare(out.esn.places, replay.places);
    compare(out.esn.transitions, replay.transitions);
  }
  for (size_t i = 0; i < instance.operand_nets.size(); ++i) {
    const OperandNet& src = instance.operand_nets[i];
    std::vector<double> qs = out.operands[i].places.front();
    std::vector<double> qe = out.operands[i].transitions.front();
    Trajectory replay;
    replay.places.push_back(qs);
    replay.transitions.push_back(qe);
    for (int k = 0; k < K; ++k) {
      StepResult step = step_operand_net(src, qs, qe, out.operand_schedules[i].u_minus[static_cast<size_t>(k)],
                                         out.operand_schedules[i].u_plus[static_cast<size_t>(k)]);
      qs = std::move(step.q_places);
      qe = std::move(step.q_transitions);
      replay.places.push_back(qs);
      replay.transitions.push_back(qe);
    }
    compare(out.operands[i].places, replay.places);
    compare(out.operands[i].transitions, replay.transitions);
  }
  out.replay_residual = residual;
  return out;
}

bool CollapseReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CollapseCheck& c) { return c.pass; });
}

CollapseReport check_theorem1_collapse(const HfnmcfInstance& instance) {
  const AssembledProgram program = assemble_hfnmcf(instance);
  const DecisionLayout& l = program.layout;
  CollapseReport report;

  // (a) instantaneous flow: no duration row may couple different steps.
  {
    std::vector<std::string> offenders;
    for (size_t t = 0; t < instance.esn.durations.size(); ++t) {
      if (instance.esn.durations[t] != 0) {
        offenders.push_back(id_or(instance.esn.transition_ids, static_cast<int>(t), "transition"));
      }
    }
    int duration_rows = 0;
    for (const RowInfo& r : program.eq_rows) {
      if (r.block == "duration_link" || r.block == "operand_duration_link") ++duration_rows;
    }
    CollapseCheck c;
    c.assumption = "instantaneous flow";
    c.pass = offenders.empty();
    if (c.pass) {
      c.detail = std::to_string(duration_rows) +
                 " duration row(s), all same-step output=input identities";
    } else {
      std::string ids;
      for (const std::string& s : offenders) ids += (ids.empty() ? "" : ", ") + s;
      c.detail = "nonzero transition durations couple different time steps: " + ids;
    }
    report.checks.push_back(std::move(c));
  }

  // (b) no operand state: operand-net and synchronization rows absent.
  {
    int operand_rows = 0;
    for (const RowInfo& r : program.eq_rows) {
      if (r.block.rfind("operand_", 0) == 0 || r.block == "sync_out" || r.block == "sync_in") {
        ++operand_rows;
      }
    }
    CollapseCheck c;
    c.assumption = "no operand state";
    c.pass = instance.operand_nets.empty() && operand_rows == 0;
    c.detail = c.pass ? "no operand nets attached"
                      : std::to_string(instance.operand_nets.size()) +
                            " operand net(s) contribute " + std::to_string(operand_rows) +
                            " row(s); the collapsed estimator tracks no operand state";
    report.checks.push_back(std::move(c));
  }

  // (c) steady single-step balance: K = 1 and buffer markings pinned to zero
  // turn the place balance into a pure incidence-balance block.
  {
    CollapseCheck c;
    c.assumption = "steady single-step buffer state";
    std::string problems;
    if (instance.horizon != 1) {
      problems += "horizon is " + std::to_string(instance.horizon) + ", expected a single step";
    }
    auto nonzero = [](const std::vector<double>& v) {
      return std::any_of(v.begin(), v.end(), [](double x) { return x != 0.0; });
    };
    if (nonzero(instance.c_b1) || nonzero(instance.c_bK)) {
      if (!problems.empty()) problems += "; ";
      problems += "buffer markings are pinned to nonzero values";
    }
    c.pass = problems.empty();
    c.detail = c.pass ? "place balance rows reduce to incidence balance over the firings"
                      : problems;
    report.checks.push_back(std::move(c));
  }

  // (d) boundary rows carry the measurement structure: they exist and touch
  // only firing columns.
  {
    CollapseCheck c;
    c.assumption = "boundary data forms the measurement structure";
    int boundary_rows = 0;
    bool firings_only = true;
    const auto a_rows = rows_of(program.qp.a_eq);
    for (size_t i = 0; i < program.eq_rows.size(); ++i) {
      const std::string& block = program.eq_rows[i].block;
      if (block != "boundary_out" && block != "boundary_in") continue;
      ++boundary_rows;
      for (const auto& [col, w] : a_rows[i]) {
        const int within = col % l.step_stride;
        if (within < l.off_u_minus) firings_only = false;
      }
    }
    c.pass = boundary_rows > 0 && firings_only;
    if (boundary_rows == 0) {
      c.detail = "no boundary rows; the estimator needs exogenous firing data";
    } else if (!firings_only) {
      c.detail = "boundary rows touch marking columns";
    } else {
      c.detail = std::to_string(boundary_rows) + " boundary row(s) over firing columns only";
    }
    report.checks.push_back(std::move(c));
  }

  return report;
}

void require_theorem1_collapse(const HfnmcfInstance& instance) {
  CollapseReport report = check_theorem1_collapse(instance);
  if (report.all_pass()) return;
  std::ostringstream os;
  os << "collapse assumptions violated:";
  for (const CollapseCheck& c : report.checks) {
    if (!c.pass) os << "\n  " << c.assumption << ": " << c.detail;
  }
  throw Error(ErrorKind::validation, os.str());
}

}  // namespace hfg
