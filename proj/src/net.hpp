#pragma once

#include <span>
#include <string>
#include <vector>

#include "sparse.hpp"
#include "types.hpp"

namespace hfg {

// Discrete-time Petri net over (operand, buffer) places and capability
// transitions. Place markings evolve as q_b += (M+ u+ - M- u-) * dt and
// transition markings as q_e += (u- - u+) * dt.
struct EngineeringSystemNet {
  SparseMatrix m_plus;   // (|operands|*|buffers|) x |capabilities|
  SparseMatrix m_minus;
  std::vector<int> durations;  // per capability, time steps
  double dt = 1.0;
  std::vector<double> q_b0;
  std::vector<double> q_e0;
  std::vector<std::string> transition_ids;  // diagnostics only
  std::vector<std::string> place_ids;       // "operand@buffer", diagnostics only

  int n_places() const { return m_plus.rows(); }
  int n_transitions() const { return m_plus.cols(); }
};

// Per-operand net tracking the operand's own state evolution. The step
// length is copied from the owning engineering system net.
struct OperandNet {
  std::string operand;
  SparseMatrix m_plus;
  SparseMatrix m_minus;
  std::vector<int> durations;
  double dt = 1.0;
  std::vector<double> q_s0;
  std::vector<double> q_e0;
  std::vector<std::string> transition_ids;
  std::vector<std::string> place_ids;

  int n_places() const { return m_plus.rows(); }
  int n_transitions() const { return m_plus.cols(); }
};

// Per-step input/output firing vectors, steps 1..K.
struct FiringSchedule {
  std::vector<std::vector<double>> u_minus;
  std::vector<std::vector<double>> u_plus;

  int steps() const { return static_cast<int>(u_minus.size()); }
};

// 0/1 couplings from stacked operand-net firings to system-net firings.
struct SyncMatrices {
  SparseMatrix lambda_plus;
  SparseMatrix lambda_minus;
};

struct StepResult {
  std::vector<double> q_places;
  std::vector<double> q_transitions;
  std::vector<Violation> violations;  // negative resulting markings
};

StepResult step_esn(const EngineeringSystemNet& net, std::span<const double> q_b,
                    std::span<const double> q_e, std::span<const double> u_minus,
                    std::span<const double> u_plus);

StepResult step_operand_net(const OperandNet& net, std::span<const double> q_s,
                            std::span<const double> q_e, std::span<const double> u_minus,
                            std::span<const double> u_plus);

// places[k] / transitions[k] hold the marking after k steps, k = 0..K.
struct Trajectory {
  std::vector<std::vector<double>> places;
  std::vector<std::vector<double>> transitions;
  std::vector<Violation> violations;
};

// Chains step_esn over the schedule. Negative markings and duration breaches
// (u_plus[k + k_d] != u_minus[k], checked for k <= K - k_d) are reported as
// violations, never clipped or repaired.
Trajectory simulate(const EngineeringSystemNet& net, const FiringSchedule& schedule, int horizon);

struct SyncResiduals {
  std::vector<double> plus;   // u_l_plus - lambda_plus * u_plus
  std::vector<double> minus;  // u_l_minus - lambda_minus * u_minus
};

SyncResiduals check_sync(const SyncMatrices& sync, std::span<const double> u_l_minus,
                         std::span<const double> u_l_plus, std::span<const double> u_minus,
                         std::span<const double> u_plus);

// Builds the engineering system net of an architecture with zero markings.
EngineeringSystemNet make_esn(const SystemArchitecture& arch, double dt);

}  // namespace hfg
