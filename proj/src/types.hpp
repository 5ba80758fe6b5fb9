#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hfg {

enum class BufferKind { plant, terminal, port, substation, junction };
enum class ProcessKind { injection, withdrawal, transport, storage, transformation };

const char* to_string(BufferKind kind);
const char* to_string(ProcessKind kind);
std::optional<BufferKind> parse_buffer_kind(std::string_view s);
std::optional<ProcessKind> parse_process_kind(std::string_view s);

// A commodity moved through the system. Quantities are always stored in GJ;
// the unit tag is metadata only.
struct Operand {
  std::string id;
  std::string name;
  std::string unit = "GJ";
};

// A resource at a unique location that stores or transforms operands.
struct Buffer {
  std::string id;
  std::string name;
  std::string location;
  BufferKind kind = BufferKind::junction;
};

struct OperandFlow {
  std::string operand;
  double coefficient = 1.0;  // GJ per GJ of reference output
};

struct ProcessSpec {
  ProcessKind kind = ProcessKind::transport;
  std::vector<OperandFlow> inputs;
  std::vector<OperandFlow> outputs;
};

// "Resource does process": the atomic unit of system function and the
// column index of the incidence matrices.
struct Capability {
  std::string id;
  ProcessSpec process;
  std::string origin;
  std::string destination;
  int duration = 0;                  // time steps
  std::optional<double> capacity;    // GJ per time step
};

struct Violation {
  std::string entity;
  std::string rule;
  std::string detail;
};

struct SystemArchitecture {
  std::vector<Operand> operands;
  std::vector<Buffer> buffers;
  std::vector<Capability> capabilities;

  // Canonical enumeration used by all matrices: vector order is index order.
  int operand_index(std::string_view id) const;
  int buffer_index(std::string_view id) const;
  int capability_index(std::string_view id) const;

  int place_count() const { return static_cast<int>(operands.size() * buffers.size()); }
  // Operand-major place indexing: operand_index * |buffers| + buffer_index.
  int place_index(int operand, int buffer) const {
    return operand * static_cast<int>(buffers.size()) + buffer;
  }
  std::string place_label(int place) const;
};

// Empty result iff all type invariants hold. Violations are data, not errors.
std::vector<Violation> validate_architecture(const SystemArchitecture& arch);

// Throws Error(validation) listing every violation.
void require_valid(const SystemArchitecture& arch);

// Descriptive label for a capability's process, shared by the sankey export
// and the grouped error report, e.g. "inject coal", "transform coal->elec".
std::string process_type_label(const Capability& cap);

// Location of the buffer a capability acts at (origin side).
std::string capability_region(const SystemArchitecture& arch, const Capability& cap);

}  // namespace hfg
