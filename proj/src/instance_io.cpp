#include "instance_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace hfg {

namespace {

using Json = nlohmann::ordered_json;

void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw Error(ErrorKind::schema, where + ": unknown key \"" + key + "\"");
    }
  }
}

const Json& require_key(const Json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::schema, where + ": missing key \"" + key + "\"");
  }
  return *it;
}

std::string get_string(const Json& obj, const std::string& key, const std::string& where) {
  const Json& v = require_key(obj, key, where);
  if (!v.is_string()) throw Error(ErrorKind::schema, where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

double get_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw Error(ErrorKind::schema, where + " must be a number");
  return v.get<double>();
}

std::vector<OperandFlow> parse_flows(const Json& arr, const std::string& where) {
  if (!arr.is_array()) throw Error(ErrorKind::schema, where + " must be an array");
  std::vector<OperandFlow> out;
  for (size_t i = 0; i < arr.size(); ++i) {
    const Json& f = arr[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!f.is_object()) throw Error(ErrorKind::schema, at + " must be an object");
    reject_unknown_keys(f, {"operand", "coefficient"}, at);
    OperandFlow flow;
    flow.operand = get_string(f, "operand", at);
    flow.coefficient = f.contains("coefficient") ? get_number(f["coefficient"], at + ".coefficient") : 1.0;
    out.push_back(std::move(flow));
  }
  return out;
}

Instance parse_instance_json(const Json& doc, const std::string& origin) {
  if (!doc.is_object()) throw Error(ErrorKind::schema, origin + ": document must be an object");
  reject_unknown_keys(doc,
                      {"operands", "buffers", "capabilities", "measurements", "capacities",
                       "horizon", "dt"},
                      origin);

  Instance inst;

  const Json& horizon = require_key(doc, "horizon", origin);
  if (!horizon.is_number_integer() || horizon.get<long long>() < 1) {
    throw Error(ErrorKind::schema, origin + ": \"horizon\" must be a positive integer");
  }
  inst.horizon = horizon.get<int>();
  inst.dt = doc.contains("dt") ? get_number(doc["dt"], origin + ".dt") : 1.0;
  if (!(inst.dt > 0.0) || !std::isfinite(inst.dt)) {
    throw Error(ErrorKind::schema, origin + ": \"dt\" must be positive");
  }

  const Json& operands = require_key(doc, "operands", origin);
  if (!operands.is_array()) throw Error(ErrorKind::schema, origin + ": \"operands\" must be an array");
  for (size_t i = 0; i < operands.size(); ++i) {
    const std::string at = origin + ".operands[" + std::to_string(i) + "]";
    const Json& o = operands[i];
    if (!o.is_object()) throw Error(ErrorKind::schema, at + " must be an object");
    reject_unknown_keys(o, {"id", "name", "unit"}, at);
    Operand op;
    op.id = get_string(o, "id", at);
    op.name = o.contains("name") ? get_string(o, "name", at) : op.id;
    op.unit = o.contains("unit") ? get_string(o, "unit", at) : "GJ";
    inst.arch.operands.push_back(std::move(op));
  }

  const Json& buffers = require_key(doc, "buffers", origin);
  if (!buffers.is_array()) throw Error(ErrorKind::schema, origin + ": \"buffers\" must be an array");
  for (size_t i = 0; i < buffers.size(); ++i) {
    const std::string at = origin + ".buffers[" + std::to_string(i) + "]";
    const Json& b = buffers[i];
    if (!b.is_object()) throw Error(ErrorKind::schema, at + " must be an object");
    reject_unknown_keys(b, {"id", "name", "location", "kind"}, at);
    Buffer buf;
    buf.id = get_string(b, "id", at);
    buf.name = b.contains("name") ? get_string(b, "name", at) : buf.id;
    buf.location = get_string(b, "location", at);
    const std::string kind = get_string(b, "kind", at);
    auto parsed = parse_buffer_kind(kind);
    if (!parsed) throw Error(ErrorKind::schema, at + ": unknown buffer kind \"" + kind + "\"");
    buf.kind = *parsed;
    inst.arch.buffers.push_back(std::move(buf));
  }

  const Json& capabilities = require_key(doc, "capabilities", origin);
  if (!capabilities.is_array()) {
    throw Error(ErrorKind::schema, origin + ": \"capabilities\" must be an array");
  }
  for (size_t i = 0; i < capabilities.size(); ++i) {
    const std::string at = origin + ".capabilities[" + std::to_string(i) + "]";
    const Json& c = capabilities[i];
    if (!c.is_object()) throw Error(ErrorKind::schema, at + " must be an object");
    reject_unknown_keys(c, {"id", "kind", "origin", "destination", "inputs", "outputs", "duration"},
                        at);
    Capability cap;
    cap.id = get_string(c, "id", at);
    const std::string kind = get_string(c, "kind", at);
    auto parsed = parse_process_kind(kind);
    if (!parsed) throw Error(ErrorKind::schema, at + ": unknown process kind \"" + kind + "\"");
    cap.process.kind = *parsed;
    cap.origin = get_string(c, "origin", at);
    cap.destination = get_string(c, "destination", at);
    if (c.contains("inputs")) cap.process.inputs = parse_flows(c["inputs"], at + ".inputs");
    if (c.contains("outputs")) cap.process.outputs = parse_flows(c["outputs"], at + ".outputs");
    if (c.contains("duration")) {
      const Json& d = c["duration"];
      if (!d.is_number_integer()) throw Error(ErrorKind::schema, at + ": \"duration\" must be an integer");
      cap.duration = d.get<int>();
    }
    inst.arch.capabilities.push_back(std::move(cap));
  }

  if (doc.contains("measurements")) {
    const Json& measurements = doc["measurements"];
    if (!measurements.is_array()) {
      throw Error(ErrorKind::schema, origin + ": \"measurements\" must be an array");
    }
    for (size_t i = 0; i < measurements.size(); ++i) {
      const std::string at = origin + ".measurements[" + std::to_string(i) + "]";
      const Json& msr = measurements[i];
      if (!msr.is_object()) throw Error(ErrorKind::schema, at + " must be an object");
      reject_unknown_keys(msr, {"id", "capabilities", "samples", "weight", "downsample"}, at);
      MeasurementSeries s;
      s.id = get_string(msr, "id", at);
      const Json& caps = require_key(msr, "capabilities", at);
      if (!caps.is_array() || caps.empty()) {
        throw Error(ErrorKind::schema, at + ": \"capabilities\" must be a non-empty array");
      }
      for (const Json& c : caps) {
        if (!c.is_string()) throw Error(ErrorKind::schema, at + ": capability ids must be strings");
        const int idx = inst.arch.capability_index(c.get<std::string>());
        if (idx < 0) {
          throw Error(ErrorKind::validation, at + ": measurement '" + s.id +
                                                 "' references unknown capability \"" +
                                                 c.get<std::string>() + "\"");
        }
        s.capability_footprint.push_back(idx);
      }
      const Json& samples = require_key(msr, "samples", at);
      if (!samples.is_array() || samples.empty()) {
        throw Error(ErrorKind::schema, at + ": \"samples\" must be a non-empty array");
      }
      for (size_t b = 0; b < samples.size(); ++b) {
        const std::string sat = at + ".samples[" + std::to_string(b) + "]";
        const Json& sample = samples[b];
        if (!sample.is_object()) throw Error(ErrorKind::schema, sat + " must be an object");
        reject_unknown_keys(sample, {"steps", "value"}, sat);
        const Json& steps = require_key(sample, "steps", sat);
        if (!steps.is_array() || steps.empty()) {
          throw Error(ErrorKind::schema, sat + ": \"steps\" must be a non-empty array");
        }
        std::vector<int> bucket;
        for (const Json& k : steps) {
          if (!k.is_number_integer()) {
            throw Error(ErrorKind::schema, sat + ": steps must be integers");
          }
          bucket.push_back(k.get<int>());
        }
        s.temporal_footprint.push_back(std::move(bucket));
        s.values.push_back(get_number(require_key(sample, "value", sat), sat + ".value"));
      }
      if (msr.contains("weight")) {
        s.weight_override = get_number(msr["weight"], at + ".weight");
      }
      bool downsample = false;
      if (msr.contains("downsample")) {
        if (!msr["downsample"].is_boolean()) {
          throw Error(ErrorKind::schema, at + ": \"downsample\" must be a boolean");
        }
        downsample = msr["downsample"].get<bool>();
      }
      if (downsample) s = downsample_fine_data(s, inst.horizon);
      inst.measurements.push_back(std::move(s));
    }
  }

  if (doc.contains("capacities")) {
    const Json& capacities = doc["capacities"];
    if (!capacities.is_object()) {
      throw Error(ErrorKind::schema, origin + ": \"capacities\" must be an object");
    }
    for (const auto& [id, bound] : capacities.items()) {
      const int idx = inst.arch.capability_index(id);
      if (idx < 0) {
        throw Error(ErrorKind::validation,
                    origin + ": capacity references unknown capability \"" + id + "\"");
      }
      const double v = get_number(bound, origin + ".capacities[\"" + id + "\"]");
      inst.arch.capabilities[static_cast<size_t>(idx)].capacity = v;
      inst.capacities.push_back({idx, v});
    }
  }

  require_valid(inst.arch);
  for (const MeasurementSeries& s : inst.measurements) {
    validate_measurement(s, static_cast<int>(inst.arch.capabilities.size()), inst.horizon);
  }
  std::set<std::string> measurement_ids;
  for (const MeasurementSeries& s : inst.measurements) {
    if (!measurement_ids.insert(s.id).second) {
      throw Error(ErrorKind::validation, origin + ": measurement id repeated: \"" + s.id + "\"");
    }
  }
  return inst;
}

}  // namespace

Instance parse_instance(const std::string& json_text, const std::string& origin) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, origin + ": " + e.what());
  }
  return parse_instance_json(doc, origin);
}

Instance load_instance(const std::string& path) {
  return parse_instance(read_text_file(path), path);
}

std::string instance_to_json(const Instance& instance) {
  Json doc;
  doc["operands"] = Json::array();
  for (const Operand& o : instance.arch.operands) {
    Json j;
    j["id"] = o.id;
    j["name"] = o.name;
    j["unit"] = o.unit;
    doc["operands"].push_back(std::move(j));
  }
  doc["buffers"] = Json::array();
  for (const Buffer& b : instance.arch.buffers) {
    Json j;
    j["id"] = b.id;
    j["name"] = b.name;
    j["location"] = b.location;
    j["kind"] = to_string(b.kind);
    doc["buffers"].push_back(std::move(j));
  }
  doc["capabilities"] = Json::array();
  for (const Capability& c : instance.arch.capabilities) {
    Json j;
    j["id"] = c.id;
    j["kind"] = to_string(c.process.kind);
    j["origin"] = c.origin;
    j["destination"] = c.destination;
    auto flows = [](const std::vector<OperandFlow>& fs) {
      Json arr = Json::array();
      for (const OperandFlow& f : fs) {
        Json e;
        e["operand"] = f.operand;
        e["coefficient"] = f.coefficient;
        arr.push_back(std::move(e));
      }
      return arr;
    };
    if (!c.process.inputs.empty()) j["inputs"] = flows(c.process.inputs);
    if (!c.process.outputs.empty()) j["outputs"] = flows(c.process.outputs);
    if (c.duration != 0) j["duration"] = c.duration;
    doc["capabilities"].push_back(std::move(j));
  }
  doc["measurements"] = Json::array();
  for (const MeasurementSeries& s : instance.measurements) {
    Json j;
    j["id"] = s.id;
    j["capabilities"] = Json::array();
    for (int c : s.capability_footprint) {
      j["capabilities"].push_back(instance.arch.capabilities[static_cast<size_t>(c)].id);
    }
    j["samples"] = Json::array();
    for (size_t b = 0; b < s.values.size(); ++b) {
      Json sample;
      sample["steps"] = s.temporal_footprint[b];
      sample["value"] = s.values[b];
      j["samples"].push_back(std::move(sample));
    }
    if (s.weight_override) j["weight"] = *s.weight_override;
    doc["measurements"].push_back(std::move(j));
  }
  doc["capacities"] = Json::object();
  for (const CapacityBound& b : instance.capacities) {
    doc["capacities"][instance.arch.capabilities[static_cast<size_t>(b.capability)].id] = b.bound;
  }
  doc["horizon"] = instance.horizon;
  doc["dt"] = instance.dt;
  return doc.dump(2) + "\n";
}

namespace {

struct RegionSpec {
  std::string tag;    // location tag, e.g. "R1"
  std::string sfx;    // id suffix, e.g. "_r1"
  double scale;       // demand scale relative to region 1
};

void append_region(Instance& inst, const RegionSpec& r) {
  auto buffer = [&](const std::string& id, const std::string& name, BufferKind kind) {
    inst.arch.buffers.push_back({id + r.sfx, name + " " + r.tag, r.tag, kind});
  };
  buffer("coal_term", "Coal terminal", BufferKind::terminal);
  buffer("gas_term", "Gas terminal", BufferKind::terminal);
  buffer("refinery", "Refinery", BufferKind::plant);
  buffer("oil_term", "Oil terminal", BufferKind::terminal);
  buffer("plant", "Power plant", BufferKind::plant);
  buffer("sub", "Substation", BufferKind::substation);

  auto cap = [&](const std::string& id, ProcessKind kind, const std::string& origin,
                 const std::string& destination, std::vector<OperandFlow> inputs,
                 std::vector<OperandFlow> outputs) {
    Capability c;
    c.id = id + r.sfx;
    c.process.kind = kind;
    c.process.inputs = std::move(inputs);
    c.process.outputs = std::move(outputs);
    c.origin = origin + r.sfx;
    c.destination = destination + r.sfx;
    inst.arch.capabilities.push_back(std::move(c));
  };
  cap("inject_coal", ProcessKind::injection, "coal_term", "coal_term", {}, {{"coal", 1.0}});
  cap("withdraw_coal", ProcessKind::withdrawal, "coal_term", "coal_term", {{"coal", 1.0}}, {});
  cap("move_coal", ProcessKind::transport, "coal_term", "plant", {{"coal", 1.0}}, {{"coal", 1.0}});
  cap("inject_gas", ProcessKind::injection, "gas_term", "gas_term", {}, {{"gas", 1.0}});
  cap("withdraw_gas", ProcessKind::withdrawal, "gas_term", "gas_term", {{"gas", 1.0}}, {});
  cap("move_gas", ProcessKind::transport, "gas_term", "plant", {{"gas", 1.0}}, {{"gas", 1.0}});
  cap("inject_crude", ProcessKind::injection, "refinery", "refinery", {}, {{"crude_oil", 1.0}});
  cap("refine_oil", ProcessKind::transformation, "refinery", "refinery", {{"crude_oil", 1.285}},
      {{"processed_oil", 1.0}});
  cap("move_oil", ProcessKind::transport, "refinery", "oil_term", {{"processed_oil", 1.0}},
      {{"processed_oil", 1.0}});
  cap("withdraw_oil", ProcessKind::withdrawal, "oil_term", "oil_term", {{"processed_oil", 1.0}}, {});
  cap("move_oil_plant", ProcessKind::transport, "refinery", "plant", {{"processed_oil", 1.0}},
      {{"processed_oil", 1.0}});
  cap("inject_nuclear", ProcessKind::injection, "plant", "plant", {}, {{"nuclear", 1.0}});
  cap("gen_coal", ProcessKind::transformation, "plant", "plant", {{"coal", 3.102}}, {{"elec", 1.0}});
  cap("gen_gas", ProcessKind::transformation, "plant", "plant", {{"gas", 2.253}}, {{"elec", 1.0}});
  cap("gen_oil", ProcessKind::transformation, "plant", "plant", {{"processed_oil", 3.289}},
      {{"elec", 1.0}});
  cap("gen_nuclear", ProcessKind::transformation, "plant", "plant", {{"nuclear", 3.056}},
      {{"elec", 1.0}});
  cap("move_elec", ProcessKind::transport, "plant", "sub", {{"elec", 1.0}}, {{"elec", 1.0}});
  cap("withdraw_elec", ProcessKind::withdrawal, "sub", "sub", {{"elec", 1.0}}, {});

  // Monthly shapes; one value per step, fixed literals.
  const double demand[12] = {1.25, 1.2, 1.1, 1.0, 0.9, 0.85, 0.9, 1.0, 1.1, 1.2, 1.25, 1.3};
  const double gas_demand[12] = {0.75, 0.7, 0.6, 0.5, 0.42, 0.38, 0.4, 0.45, 0.55, 0.65, 0.72, 0.78};

  auto monthly = [&](const std::string& id, const std::string& capability, const double* shape,
                     double scale) {
    MeasurementSeries s;
    s.id = id + r.sfx;
    s.capability_footprint.push_back(inst.arch.capability_index(capability + r.sfx));
    for (int k = 1; k <= 12; ++k) {
      s.temporal_footprint.push_back({k});
      s.values.push_back(shape[k - 1] * scale);
    }
    inst.measurements.push_back(std::move(s));
  };
  auto annual = [&](const std::string& id, const std::string& capability, double value) {
    MeasurementSeries s;
    s.id = id + r.sfx;
    s.capability_footprint.push_back(inst.arch.capability_index(capability + r.sfx));
    std::vector<int> all;
    for (int k = 1; k <= 12; ++k) all.push_back(k);
    s.temporal_footprint.push_back(std::move(all));
    s.values.push_back(value);
    inst.measurements.push_back(std::move(s));
  };

  monthly("elec_demand", "withdraw_elec", demand, r.scale);
  monthly("gen_coal_target", "gen_coal", demand, 0.3 * r.scale);
  monthly("gen_gas_target", "gen_gas", demand, 0.4 * r.scale);
  monthly("gen_oil_target", "gen_oil", demand, 0.1 * r.scale);
  monthly("gen_nuclear_target", "gen_nuclear", demand, 0.2 * r.scale);
  monthly("gas_demand", "withdraw_gas", gas_demand, r.scale);
  annual("coal_demand", "withdraw_coal", 6.0 * r.scale);
  annual("oil_demand", "withdraw_oil", 3.6 * r.scale);

  auto capacity = [&](const std::string& id, double bound) {
    const int idx = inst.arch.capability_index(id + r.sfx);
    inst.arch.capabilities[static_cast<size_t>(idx)].capacity = bound;
    inst.capacities.push_back({idx, bound});
  };
  capacity("gen_coal", 0.5 * r.scale);
  capacity("gen_gas", 0.65 * r.scale);
  capacity("gen_oil", 0.3 * r.scale);
  capacity("gen_nuclear", 0.4 * r.scale);
}

}  // namespace

std::string make_mini_ames(int region_count) {
  if (region_count != 1 && region_count != 2) {
    throw Error(ErrorKind::argument, "region count must be 1 or 2");
  }
  Instance inst;
  inst.horizon = 12;
  inst.dt = 1.0;
  inst.arch.operands = {
      {"coal", "Coal", "GJ"},          {"gas", "Natural Gas", "GJ"},
      {"crude_oil", "Crude Oil", "GJ"}, {"processed_oil", "Processed Oil", "GJ"},
      {"nuclear", "Nuclear Fuel", "GJ"}, {"elec", "Electric Power", "GJ"},
  };
  append_region(inst, {"R1", "_r1", 1.0});
  if (region_count == 2) {
    append_region(inst, {"R2", "_r2", 0.8});
    // One interstate transport per operand, region 1 to region 2.
    auto xfer = [&](const std::string& operand, const std::string& origin,
                    const std::string& destination) {
      Capability c;
      c.id = "xfer_" + operand + "_r1_r2";
      c.process.kind = ProcessKind::transport;
      c.process.inputs = {{operand, 1.0}};
      c.process.outputs = {{operand, 1.0}};
      c.origin = origin + "_r1";
      c.destination = destination + "_r2";
      inst.arch.capabilities.push_back(std::move(c));
    };
    xfer("coal", "coal_term", "coal_term");
    xfer("gas", "gas_term", "gas_term");
    xfer("crude_oil", "refinery", "refinery");
    xfer("processed_oil", "oil_term", "oil_term");
    xfer("nuclear", "plant", "plant");
    xfer("elec", "sub", "sub");
  }
  require_valid(inst.arch);
  return instance_to_json(inst);
}

namespace {

std::vector<std::vector<double>> parse_firing_matrix(const Json& arr, int n_transitions,
                                                     const std::string& where) {
  if (!arr.is_array()) throw Error(ErrorKind::schema, where + " must be an array of arrays");
  std::vector<std::vector<double>> out;
  for (size_t k = 0; k < arr.size(); ++k) {
    const Json& row = arr[k];
    const std::string at = where + "[" + std::to_string(k) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != n_transitions) {
      throw Error(ErrorKind::schema,
                  at + " must be an array of " + std::to_string(n_transitions) + " numbers");
    }
    std::vector<double> v;
    for (const Json& x : row) v.push_back(get_number(x, at));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

ScheduleInput parse_schedule(const std::string& json_text, const SystemArchitecture& arch) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("schedule: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::schema, "schedule must be an object");
  reject_unknown_keys(doc, {"u_minus", "u_plus", "q_b0", "q_e0"}, "schedule");

  const int nt = static_cast<int>(arch.capabilities.size());
  ScheduleInput out;
  out.schedule.u_minus =
      parse_firing_matrix(require_key(doc, "u_minus", "schedule"), nt, "schedule.u_minus");
  out.schedule.u_plus =
      parse_firing_matrix(require_key(doc, "u_plus", "schedule"), nt, "schedule.u_plus");
  if (out.schedule.u_minus.size() != out.schedule.u_plus.size()) {
    throw Error(ErrorKind::schema, "schedule: u_minus and u_plus must have the same length");
  }

  out.q_b0.assign(static_cast<size_t>(arch.place_count()), 0.0);
  out.q_e0.assign(static_cast<size_t>(nt), 0.0);
  if (doc.contains("q_b0")) {
    const Json& q = doc["q_b0"];
    if (!q.is_object()) throw Error(ErrorKind::schema, "schedule: \"q_b0\" must be an object");
    for (const auto& [key, value] : q.items()) {
      const auto sep = key.find('@');
      if (sep == std::string::npos) {
        throw Error(ErrorKind::schema, "schedule: q_b0 keys must look like \"operand@buffer\"");
      }
      const int op = arch.operand_index(key.substr(0, sep));
      const int buf = arch.buffer_index(key.substr(sep + 1));
      if (op < 0 || buf < 0) {
        throw Error(ErrorKind::validation, "schedule: unknown place \"" + key + "\"");
      }
      out.q_b0[static_cast<size_t>(arch.place_index(op, buf))] = get_number(value, "q_b0." + key);
    }
  }
  if (doc.contains("q_e0")) {
    const Json& q = doc["q_e0"];
    if (!q.is_object()) throw Error(ErrorKind::schema, "schedule: \"q_e0\" must be an object");
    for (const auto& [key, value] : q.items()) {
      const int t = arch.capability_index(key);
      if (t < 0) throw Error(ErrorKind::validation, "schedule: unknown capability \"" + key + "\"");
      out.q_e0[static_cast<size_t>(t)] = get_number(value, "q_e0." + key);
    }
  }
  return out;
}

ScheduleInput load_schedule(const std::string& path, const SystemArchitecture& arch) {
  return parse_schedule(read_text_file(path), arch);
}

std::string trajectory_to_json(const Trajectory& trajectory, const EngineeringSystemNet& net) {
  Json doc;
  doc["steps"] = trajectory.places.empty() ? 0 : trajectory.places.size() - 1;
  doc["places"] = Json::array();
  for (int p = 0; p < net.n_places(); ++p) {
    Json entry;
    entry["id"] = p < static_cast<int>(net.place_ids.size()) ? net.place_ids[static_cast<size_t>(p)]
                                                             : "place" + std::to_string(p);
    Json marks = Json::array();
    for (const std::vector<double>& q : trajectory.places) marks.push_back(q[static_cast<size_t>(p)]);
    entry["marking"] = std::move(marks);
    doc["places"].push_back(std::move(entry));
  }
  doc["transitions"] = Json::array();
  for (int t = 0; t < net.n_transitions(); ++t) {
    Json entry;
    entry["id"] = t < static_cast<int>(net.transition_ids.size())
                      ? net.transition_ids[static_cast<size_t>(t)]
                      : "transition" + std::to_string(t);
    Json marks = Json::array();
    for (const std::vector<double>& q : trajectory.transitions) {
      marks.push_back(q[static_cast<size_t>(t)]);
    }
    entry["marking"] = std::move(marks);
    doc["transitions"].push_back(std::move(entry));
  }
  doc["violations"] = Json::array();
  for (const Violation& v : trajectory.violations) {
    Json entry;
    entry["entity"] = v.entity;
    entry["rule"] = v.rule;
    entry["detail"] = v.detail;
    doc["violations"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) throw Error(ErrorKind::io, "failed reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out.good()) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace hfg
