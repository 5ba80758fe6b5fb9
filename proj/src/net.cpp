#include "net.hpp"

#include <cmath>

#include "error.hpp"
#include "incidence.hpp"

namespace hfg {

namespace {

constexpr double kMarkingEps = 1e-12;

void require_size(std::span<const double> v, int n, const char* what) {
  if (static_cast<int>(v.size()) != n) {
    throw Error(ErrorKind::argument, std::string(what) + " has length " +
                                         std::to_string(v.size()) + ", expected " +
                                         std::to_string(n));
  }
}

std::string transition_name(const std::vector<std::string>& ids, int t) {
  if (t >= 0 && t < static_cast<int>(ids.size())) return ids[static_cast<size_t>(t)];
  return "transition " + std::to_string(t);
}

template <typename Net>
StepResult step_net(const Net& net, std::span<const double> q_places,
                    std::span<const double> q_transitions, std::span<const double> u_minus,
                    std::span<const double> u_plus, const char* place_word) {
  require_size(q_places, net.n_places(), "place marking");
  require_size(q_transitions, net.n_transitions(), "transition marking");
  require_size(u_minus, net.n_transitions(), "input firing vector");
  require_size(u_plus, net.n_transitions(), "output firing vector");

  StepResult out;
  out.q_places.assign(q_places.begin(), q_places.end());
  out.q_transitions.assign(q_transitions.begin(), q_transitions.end());

  const std::vector<double> in = net.m_plus.multiply(u_plus);
  const std::vector<double> pulled = net.m_minus.multiply(u_minus);
  for (int p = 0; p < net.n_places(); ++p) {
    out.q_places[static_cast<size_t>(p)] +=
        (in[static_cast<size_t>(p)] - pulled[static_cast<size_t>(p)]) * net.dt;
    if (out.q_places[static_cast<size_t>(p)] < -kMarkingEps) {
      out.violations.push_back({std::string(place_word) + " " + std::to_string(p),
                                "marking must stay nonnegative",
                                "marking " + format_double(out.q_places[static_cast<size_t>(p)])});
    }
  }
  for (int t = 0; t < net.n_transitions(); ++t) {
    out.q_transitions[static_cast<size_t>(t)] +=
        (u_minus[static_cast<size_t>(t)] - u_plus[static_cast<size_t>(t)]) * net.dt;
    if (out.q_transitions[static_cast<size_t>(t)] < -kMarkingEps) {
      out.violations.push_back(
          {transition_name(net.transition_ids, t), "marking must stay nonnegative",
           "transition marking " + format_double(out.q_transitions[static_cast<size_t>(t)])});
    }
  }
  return out;
}

}  // namespace

StepResult step_esn(const EngineeringSystemNet& net, std::span<const double> q_b,
                    std::span<const double> q_e, std::span<const double> u_minus,
                    std::span<const double> u_plus) {
  return step_net(net, q_b, q_e, u_minus, u_plus, "place");
}

StepResult step_operand_net(const OperandNet& net, std::span<const double> q_s,
                            std::span<const double> q_e, std::span<const double> u_minus,
                            std::span<const double> u_plus) {
  return step_net(net, q_s, q_e, u_minus, u_plus, "operand place");
}

Trajectory simulate(const EngineeringSystemNet& net, const FiringSchedule& schedule, int horizon) {
  if (horizon < 0) throw Error(ErrorKind::argument, "horizon must be nonnegative");
  if (schedule.steps() != horizon || static_cast<int>(schedule.u_plus.size()) != horizon) {
    throw Error(ErrorKind::argument, "schedule length does not match horizon " +
                                         std::to_string(horizon));
  }
  if (static_cast<int>(net.durations.size()) != net.n_transitions()) {
    throw Error(ErrorKind::argument, "net has " + std::to_string(net.durations.size()) +
                                         " durations for " + std::to_string(net.n_transitions()) +
                                         " transitions");
  }

  Trajectory out;
  std::vector<double> q_b = net.q_b0;
  std::vector<double> q_e = net.q_e0;
  if (q_b.empty()) q_b.assign(static_cast<size_t>(net.n_places()), 0.0);
  if (q_e.empty()) q_e.assign(static_cast<size_t>(net.n_transitions()), 0.0);
  out.places.push_back(q_b);
  out.transitions.push_back(q_e);

  for (int k = 0; k < horizon; ++k) {
    StepResult step = step_esn(net, q_b, q_e, schedule.u_minus[static_cast<size_t>(k)],
                               schedule.u_plus[static_cast<size_t>(k)]);
    for (Violation& v : step.violations) {
      v.detail += " at step " + std::to_string(k + 1);
      out.violations.push_back(std::move(v));
    }
    q_b = std::move(step.q_places);
    q_e = std::move(step.q_transitions);
    out.places.push_back(q_b);
    out.transitions.push_back(q_e);
  }

  // Transition duration: the output firing must lag the input firing by the
  // transition's duration, checked on steps that stay inside the horizon.
  for (int t = 0; t < net.n_transitions(); ++t) {
    const int kd = net.durations[static_cast<size_t>(t)];
    for (int k = 1; k + kd <= horizon; ++k) {
      const double in = schedule.u_minus[static_cast<size_t>(k - 1)][static_cast<size_t>(t)];
      const double outf =
          schedule.u_plus[static_cast<size_t>(k + kd - 1)][static_cast<size_t>(t)];
      if (std::fabs(outf - in) > 1e-9) {
        out.violations.push_back(
            {transition_name(net.transition_ids, t), "transition duration must be honored",
             "output firing at step " + std::to_string(k + kd) + " is " + format_double(outf) +
                 " but input firing at step " + std::to_string(k) + " is " + format_double(in)});
      }
    }
  }
  return out;
}

SyncResiduals check_sync(const SyncMatrices& sync, std::span<const double> u_l_minus,
                         std::span<const double> u_l_plus, std::span<const double> u_minus,
                         std::span<const double> u_plus) {
  require_size(u_l_plus, sync.lambda_plus.rows(), "stacked output firing vector");
  require_size(u_plus, sync.lambda_plus.cols(), "output firing vector");
  require_size(u_l_minus, sync.lambda_minus.rows(), "stacked input firing vector");
  require_size(u_minus, sync.lambda_minus.cols(), "input firing vector");

  SyncResiduals out;
  const std::vector<double> coupled_plus = sync.lambda_plus.multiply(u_plus);
  const std::vector<double> coupled_minus = sync.lambda_minus.multiply(u_minus);
  out.plus.resize(u_l_plus.size());
  out.minus.resize(u_l_minus.size());
  for (size_t i = 0; i < u_l_plus.size(); ++i) out.plus[i] = u_l_plus[i] - coupled_plus[i];
  for (size_t i = 0; i < u_l_minus.size(); ++i) out.minus[i] = u_l_minus[i] - coupled_minus[i];
  return out;
}

EngineeringSystemNet make_esn(const SystemArchitecture& arch, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::argument, "time step length must be positive");
  }
  IncidenceMatrices m = incidence_matrices(arch);
  EngineeringSystemNet net;
  net.m_plus = std::move(m.m_plus);
  net.m_minus = std::move(m.m_minus);
  net.dt = dt;
  net.durations.reserve(arch.capabilities.size());
  net.transition_ids.reserve(arch.capabilities.size());
  for (const Capability& cap : arch.capabilities) {
    net.durations.push_back(cap.duration);
    net.transition_ids.push_back(cap.id);
  }
  net.place_ids.reserve(static_cast<size_t>(net.n_places()));
  for (int p = 0; p < net.n_places(); ++p) net.place_ids.push_back(arch.place_label(p));
  net.q_b0.assign(static_cast<size_t>(net.n_places()), 0.0);
  net.q_e0.assign(static_cast<size_t>(net.n_transitions()), 0.0);
  return net;
}

}  // namespace hfg
