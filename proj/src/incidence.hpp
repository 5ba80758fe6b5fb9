#pragma once

#include <vector>

#include "sparse.hpp"
#include "types.hpp"

namespace hfg {

// One weighted element of a third-order incidence tensor: capability
// `capability` pulls (negative tensor) or injects (positive tensor)
// operand `operand` at buffer `buffer`.
struct IncidenceEntry {
  int operand = 0;
  int buffer = 0;
  int capability = 0;
  double weight = 0.0;

  friend bool operator==(const IncidenceEntry&, const IncidenceEntry&) = default;
};

struct IncidenceTensors {
  std::vector<IncidenceEntry> negative;
  std::vector<IncidenceEntry> positive;
};

// Every capability input becomes a negative entry at its origin buffer and
// every output a positive entry at its destination buffer, carrying the
// process coefficient as weight. Unknown references raise a validation
// error naming the capability.
IncidenceTensors build_incidence_tensors(const SystemArchitecture& arch);

// Flattens a tensor into the (|operands|*|buffers|) x |capabilities| sparse
// matrix using operand-major row indexing: row = operand * n_buffers + buffer.
SparseMatrix matricize(const std::vector<IncidenceEntry>& entries, int n_operands, int n_buffers,
                       int n_capabilities);

// Reads the matricized form back into tensor entries (inverse of matricize).
std::vector<IncidenceEntry> entries_from_matrix(const SparseMatrix& m, int n_buffers);

struct IncidenceMatrices {
  SparseMatrix m_plus;
  SparseMatrix m_minus;
};

IncidenceMatrices incidence_matrices(const SystemArchitecture& arch);

}  // namespace hfg
