#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "error.hpp"

namespace hfg {

const char* to_string(BufferKind kind) {
  switch (kind) {
    case BufferKind::plant: return "plant";
    case BufferKind::terminal: return "terminal";
    case BufferKind::port: return "port";
    case BufferKind::substation: return "substation";
    case BufferKind::junction: return "junction";
  }
  return "junction";
}

const char* to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::injection: return "injection";
    case ProcessKind::withdrawal: return "withdrawal";
    case ProcessKind::transport: return "transport";
    case ProcessKind::storage: return "storage";
    case ProcessKind::transformation: return "transformation";
  }
  return "transport";
}

std::optional<BufferKind> parse_buffer_kind(std::string_view s) {
  for (BufferKind k : {BufferKind::plant, BufferKind::terminal, BufferKind::port,
                       BufferKind::substation, BufferKind::junction}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::optional<ProcessKind> parse_process_kind(std::string_view s) {
  for (ProcessKind k : {ProcessKind::injection, ProcessKind::withdrawal, ProcessKind::transport,
                        ProcessKind::storage, ProcessKind::transformation}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

template <typename T>
int index_of(const std::vector<T>& items, std::string_view id) {
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

int SystemArchitecture::operand_index(std::string_view id) const { return index_of(operands, id); }
int SystemArchitecture::buffer_index(std::string_view id) const { return index_of(buffers, id); }
int SystemArchitecture::capability_index(std::string_view id) const {
  return index_of(capabilities, id);
}

std::string SystemArchitecture::place_label(int place) const {
  const int nb = static_cast<int>(buffers.size());
  if (nb == 0 || place < 0 || place >= place_count()) return "place" + std::to_string(place);
  return operands[static_cast<size_t>(place / nb)].id + "@" +
         buffers[static_cast<size_t>(place % nb)].id;
}

namespace {

void check_unique_ids(std::vector<Violation>& out, const std::vector<std::string>& ids,
                      const char* what) {
  std::set<std::string> seen;
  for (const std::string& id : ids) {
    if (id.empty()) {
      out.push_back({id, "id must be non-empty", std::string(what) + " with empty id"});
      continue;
    }
    if (!seen.insert(id).second) {
      out.push_back({id, "ids must be unique", std::string(what) + " id repeated: " + id});
    }
  }
}

void check_flows(std::vector<Violation>& out, const SystemArchitecture& arch,
                 const Capability& cap, const std::vector<OperandFlow>& flows, const char* side) {
  for (const OperandFlow& f : flows) {
    if (arch.operand_index(f.operand) < 0) {
      out.push_back({cap.id, "operand must exist",
                     std::string(side) + " references unknown operand '" + f.operand + "'"});
    }
    if (!(f.coefficient > 0.0) || !std::isfinite(f.coefficient)) {
      out.push_back({cap.id, "coefficient must be positive",
                     std::string(side) + " of '" + f.operand + "' has coefficient " +
                         std::to_string(f.coefficient)});
    }
  }
  std::set<std::string> seen;
  for (const OperandFlow& f : flows) {
    if (!seen.insert(f.operand).second) {
      out.push_back({cap.id, "operand listed once per side",
                     std::string(side) + " lists operand '" + f.operand + "' twice"});
    }
  }
}

}  // namespace

std::vector<Violation> validate_architecture(const SystemArchitecture& arch) {
  std::vector<Violation> out;

  std::vector<std::string> ids;
  for (const Operand& o : arch.operands) ids.push_back(o.id);
  check_unique_ids(out, ids, "operand");
  ids.clear();
  for (const Buffer& b : arch.buffers) ids.push_back(b.id);
  check_unique_ids(out, ids, "buffer");
  ids.clear();
  for (const Capability& c : arch.capabilities) ids.push_back(c.id);
  check_unique_ids(out, ids, "capability");

  for (const Buffer& b : arch.buffers) {
    if (b.location.empty()) {
      out.push_back({b.id, "buffer needs a location", "buffer '" + b.id + "' has no location"});
    }
  }

  for (const Capability& cap : arch.capabilities) {
    const bool origin_ok = arch.buffer_index(cap.origin) >= 0;
    const bool dest_ok = arch.buffer_index(cap.destination) >= 0;
    if (!origin_ok) {
      out.push_back({cap.id, "buffer must exist", "origin '" + cap.origin + "' is unknown"});
    }
    if (!dest_ok) {
      out.push_back(
          {cap.id, "buffer must exist", "destination '" + cap.destination + "' is unknown"});
    }

    const ProcessSpec& p = cap.process;
    check_flows(out, arch, cap, p.inputs, "input");
    check_flows(out, arch, cap, p.outputs, "output");

    switch (p.kind) {
      case ProcessKind::injection:
        if (!p.inputs.empty() || p.outputs.empty()) {
          out.push_back({cap.id, "injection has outputs only",
                         "injection must have no inputs and at least one output"});
        }
        break;
      case ProcessKind::withdrawal:
        if (!p.outputs.empty() || p.inputs.empty()) {
          out.push_back({cap.id, "withdrawal has inputs only",
                         "withdrawal must have no outputs and at least one input"});
        }
        break;
      case ProcessKind::transport:
      case ProcessKind::storage: {
        const char* what = p.kind == ProcessKind::transport ? "transport" : "storage";
        if (p.inputs.size() != 1 || p.outputs.size() != 1) {
          out.push_back({cap.id, std::string(what) + " moves a single operand",
                         "expected exactly one input and one output"});
        } else {
          if (p.inputs[0].operand != p.outputs[0].operand) {
            out.push_back({cap.id, std::string(what) + " must preserve operand",
                           "input '" + p.inputs[0].operand + "' differs from output '" +
                               p.outputs[0].operand + "'"});
          }
          if (p.inputs[0].coefficient != 1.0 || p.outputs[0].coefficient != 1.0) {
            out.push_back({cap.id, std::string(what) + " is lossless",
                           "input and output coefficients must both be 1"});
          }
        }
        break;
      }
      case ProcessKind::transformation:
        if (p.inputs.empty() || p.outputs.empty()) {
          out.push_back({cap.id, "transformation needs inputs and outputs",
                         "at least one input and one output required"});
        }
        break;
    }

    if (p.kind != ProcessKind::transport && cap.origin != cap.destination) {
      out.push_back({cap.id, "process is located at a single buffer",
                     std::string(to_string(p.kind)) + " must have origin == destination"});
    }
    if (cap.duration < 0) {
      out.push_back({cap.id, "duration must be nonnegative",
                     "duration " + std::to_string(cap.duration)});
    }
    if (cap.capacity && (!(*cap.capacity >= 0.0) || !std::isfinite(*cap.capacity))) {
      out.push_back({cap.id, "capacity must be nonnegative",
                     "capacity " + std::to_string(*cap.capacity)});
    }
  }

  return out;
}

void require_valid(const SystemArchitecture& arch) {
  std::vector<Violation> v = validate_architecture(arch);
  if (v.empty()) return;
  std::ostringstream os;
  os << "architecture has " << v.size() << " violation(s):";
  for (const Violation& x : v) {
    os << "\n  [" << x.entity << "] " << x.rule << ": " << x.detail;
  }
  throw Error(ErrorKind::validation, os.str());
}

std::string process_type_label(const Capability& cap) {
  const ProcessSpec& p = cap.process;
  auto join = [](const std::vector<OperandFlow>& flows) {
    std::string s;
    for (const OperandFlow& f : flows) {
      if (!s.empty()) s += "+";
      s += f.operand;
    }
    return s;
  };
  switch (p.kind) {
    case ProcessKind::injection: return "inject " + join(p.outputs);
    case ProcessKind::withdrawal: return "withdraw " + join(p.inputs);
    case ProcessKind::transport: return "transport " + join(p.inputs);
    case ProcessKind::storage: return "store " + join(p.inputs);
    case ProcessKind::transformation:
      return "transform " + join(p.inputs) + "->" + join(p.outputs);
  }
  return cap.id;
}

std::string capability_region(const SystemArchitecture& arch, const Capability& cap) {
  const int b = arch.buffer_index(cap.origin);
  return b >= 0 ? arch.buffers[static_cast<size_t>(b)].location : std::string();
}

}  // namespace hfg
