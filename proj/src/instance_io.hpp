#pragma once

#include <string>
#include <vector>

#include "net.hpp"
#include "types.hpp"
#include "wlse.hpp"

namespace hfg {

// A fully resolved problem instance: the architecture plus everything the
// estimator needs. Produced by the JSON loaders below.
struct Instance {
  SystemArchitecture arch;
  std::vector<MeasurementSeries> measurements;
  CapacitySet capacities;
  int horizon = 1;
  double dt = 1.0;
};

// Strict JSON schema: top-level keys "operands", "buffers", "capabilities",
// "measurements", "capacities", "horizon", "dt"; unknown keys are rejected
// at every level. Parse, schema, and validation failures raise Error with
// the matching kind.
Instance parse_instance(const std::string& json_text, const std::string& origin = "<input>");
Instance load_instance(const std::string& path);

// Canonical serialized form; load(serialize(load(f))) == load(f).
std::string instance_to_json(const Instance& instance);

// Bundled synthetic fixture: coal, natural gas, oil, and nuclear chains
// feeding electric generation in one or two regions, with interstate
// transport capabilities between regions. Deterministic ids and values.
std::string make_mini_ames(int region_count);

// Firing schedule file for the simulate subcommand: per-step u_minus/u_plus
// arrays in instance capability order, with optional initial markings keyed
// by "operand@buffer" and capability id.
struct ScheduleInput {
  FiringSchedule schedule;
  std::vector<double> q_b0;
  std::vector<double> q_e0;
};

ScheduleInput parse_schedule(const std::string& json_text, const SystemArchitecture& arch);
ScheduleInput load_schedule(const std::string& path, const SystemArchitecture& arch);

std::string trajectory_to_json(const Trajectory& trajectory, const EngineeringSystemNet& net);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace hfg
