#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "net.hpp"
#include "qp.hpp"

namespace hfg {

// Exogenous pinning of firing variables: selector * u[k] = values[k-1],
// one value row per selector row, one column per step.
struct FiringBoundary {
  SparseMatrix selector;
  std::vector<std::vector<double>> values;  // [k-1][row]

  bool empty() const { return selector.rows() == 0; }
};

struct OperandBoundary {
  FiringBoundary out;
  FiringBoundary in;
};

// Full time-dependent minimum-cost-flow instance over an engineering system
// net, its operand nets, and their couplings.
struct HfnmcfInstance {
  EngineeringSystemNet esn;
  std::vector<OperandNet> operand_nets;
  SyncMatrices sync;  // rows = stacked operand transitions, cols = esn transitions
  int horizon = 1;

  // Objective over the full stacked decision layout; empty means zero.
  std::vector<double> f_quad;
  std::vector<double> f_lin;

  FiringBoundary out_boundary;  // pins output firings to exogenous data
  FiringBoundary in_boundary;   // pins input firings to exogenous data
  std::vector<OperandBoundary> operand_boundaries;  // one per operand net

  // Initial conditions at step 1.
  std::vector<double> c_b1;
  std::vector<double> c_e1;
  std::vector<double> c_sl1;  // stacked over operand nets
  // Final conditions at step K+1.
  std::vector<double> c_bK;
  std::vector<double> c_eK;
  std::vector<double> c_slK;

  // Per-step capacity rows over one step block: d_step * x[k] <= e_step.
  SparseMatrix d_step;
  std::vector<double> e_step;

  // Firings are physical flows; markings stay unconstrained.
  bool nonnegative_firings = true;
};

// Per-step variable blocks in fixed order:
//   [Q_B; Q_E; Q_SL; Q_EL; U-; U+; U_L-; U_L+]
// for steps 1..K+1. The (K+1)-th block exists so that final-condition rows
// and duration indexing stay uniform.
struct DecisionLayout {
  int n_places = 0;
  int n_transitions = 0;
  std::vector<int> operand_places;
  std::vector<int> operand_transitions;
  int n_op_places = 0;
  int n_op_transitions = 0;
  int horizon = 1;
  int step_stride = 0;
  int off_q_e = 0;
  int off_q_sl = 0;
  int off_q_el = 0;
  int off_u_minus = 0;
  int off_u_plus = 0;
  int off_u_l_minus = 0;
  int off_u_l_plus = 0;
  std::vector<int> op_place_offset;
  std::vector<int> op_trans_offset;

  int steps() const { return horizon + 1; }
  int total() const { return steps() * step_stride; }

  // k is 1-based (1..K+1) to match the constraint indexing.
  int q_b(int k, int place) const { return (k - 1) * step_stride + place; }
  int q_e(int k, int t) const { return (k - 1) * step_stride + off_q_e + t; }
  int q_sl(int k, int net, int place) const {
    return (k - 1) * step_stride + off_q_sl + op_place_offset[static_cast<size_t>(net)] + place;
  }
  int q_el(int k, int net, int t) const {
    return (k - 1) * step_stride + off_q_el + op_trans_offset[static_cast<size_t>(net)] + t;
  }
  int u_minus(int k, int t) const { return (k - 1) * step_stride + off_u_minus + t; }
  int u_plus(int k, int t) const { return (k - 1) * step_stride + off_u_plus + t; }
  int u_l_minus(int k, int net, int t) const {
    return (k - 1) * step_stride + off_u_l_minus + op_trans_offset[static_cast<size_t>(net)] + t;
  }
  int u_l_plus(int k, int net, int t) const {
    return (k - 1) * step_stride + off_u_l_plus + op_trans_offset[static_cast<size_t>(net)] + t;
  }
};

DecisionLayout make_layout(const HfnmcfInstance& instance);

// Provenance of one constraint row: which block produced it, for which step
// and entity. Equality rows come first, inequality rows continue the count.
struct RowInfo {
  std::string block;
  int k = 0;
  std::string entity;
};

struct AssembledProgram {
  QuadraticProgram qp;
  DecisionLayout layout;
  std::vector<RowInfo> eq_rows;
  std::vector<RowInfo> ineq_rows;
};

// Stacks the balance, duration, synchronization, boundary, initial and final
// condition blocks in fixed order, time-major within each block.
AssembledProgram assemble_hfnmcf(const HfnmcfInstance& instance);

// "row,equation,k,entity" with equality rows numbered first.
void write_provenance_csv(std::ostream& os, const AssembledProgram& program);

struct ExtractedTrajectories {
  Trajectory esn;
  FiringSchedule esn_schedule;
  std::vector<Trajectory> operands;
  std::vector<FiringSchedule> operand_schedules;
  double replay_residual = 0.0;
};

// Maps an optimal solution back onto net trajectories and replays them
// through the state-transition functions; the replay deviation is reported.
ExtractedTrajectories extract_trajectories(const HfnmcfInstance& instance,
                                           const AssembledProgram& program,
                                           const QpSolution& solution);

struct CollapseCheck {
  std::string assumption;
  bool pass = false;
  std::string detail;
};

struct CollapseReport {
  std::vector<CollapseCheck> checks;
  bool all_pass() const;
};

// Verifies that the instance collapses to the single-commodity steady-state
// estimator shape: no cross-step duration coupling, no operand state, place
// balance reduced to pure incidence balance, and boundary rows forming the
// measurement structure.
CollapseReport check_theorem1_collapse(const HfnmcfInstance& instance);

// Throws Error(validation) listing every failed collapse assumption.
void require_theorem1_collapse(const HfnmcfInstance& instance);

}  // namespace hfg
