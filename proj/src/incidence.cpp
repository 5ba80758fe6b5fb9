#include "incidence.hpp"

#include <cmath>

#include "error.hpp"

namespace hfg {

IncidenceTensors build_incidence_tensors(const SystemArchitecture& arch) {
  IncidenceTensors out;
  for (size_t psi = 0; psi < arch.capabilities.size(); ++psi) {
    const Capability& cap = arch.capabilities[psi];
    const int origin = arch.buffer_index(cap.origin);
    const int dest = arch.buffer_index(cap.destination);
    if (origin < 0) {
      throw Error(ErrorKind::validation,
                  "capability '" + cap.id + "' references unknown origin buffer '" + cap.origin + "'");
    }
    if (dest < 0) {
      throw Error(ErrorKind::validation, "capability '" + cap.id +
                                             "' references unknown destination buffer '" +
                                             cap.destination + "'");
    }
    for (const OperandFlow& f : cap.process.inputs) {
      const int op = arch.operand_index(f.operand);
      if (op < 0) {
        throw Error(ErrorKind::validation,
                    "capability '" + cap.id + "' references unknown operand '" + f.operand + "'");
      }
      if (!(f.coefficient > 0.0)) {
        throw Error(ErrorKind::validation, "capability '" + cap.id +
                                               "' has non-positive input weight for '" +
                                               f.operand + "'");
      }
      out.negative.push_back({op, origin, static_cast<int>(psi), f.coefficient});
    }
    for (const OperandFlow& f : cap.process.outputs) {
      const int op = arch.operand_index(f.operand);
      if (op < 0) {
        throw Error(ErrorKind::validation,
                    "capability '" + cap.id + "' references unknown operand '" + f.operand + "'");
      }
      if (!(f.coefficient > 0.0)) {
        throw Error(ErrorKind::validation, "capability '" + cap.id +
                                               "' has non-positive output weight for '" +
                                               f.operand + "'");
      }
      out.positive.push_back({op, dest, static_cast<int>(psi), f.coefficient});
    }
  }
  return out;
}

SparseMatrix matricize(const std::vector<IncidenceEntry>& entries, int n_operands, int n_buffers,
                       int n_capabilities) {
  std::vector<Triplet> t;
  t.reserve(entries.size());
  for (const IncidenceEntry& e : entries) {
    if (e.operand < 0 || e.operand >= n_operands || e.buffer < 0 || e.buffer >= n_buffers ||
        e.capability < 0 || e.capability >= n_capabilities) {
      throw Error(ErrorKind::argument, "incidence entry indices out of range");
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorKind::argument, "incidence entry weight must be positive and finite");
    }
    t.push_back({e.operand * n_buffers + e.buffer, e.capability, e.weight});
  }
  // from_triplets rejects duplicate (row, col) pairs, i.e. duplicate
  // (operand, buffer, capability) triples within one tensor.
  return SparseMatrix::from_triplets(n_operands * n_buffers, n_capabilities, std::move(t));
}

std::vector<IncidenceEntry> entries_from_matrix(const SparseMatrix& m, int n_buffers) {
  std::vector<IncidenceEntry> out;
  out.reserve(static_cast<size_t>(m.nnz()));
  for (const Triplet& t : m.entries()) {
    out.push_back({t.row / n_buffers, t.row % n_buffers, t.col, t.value});
  }
  return out;
}

IncidenceMatrices incidence_matrices(const SystemArchitecture& arch) {
  IncidenceTensors tensors = build_incidence_tensors(arch);
  const int no = static_cast<int>(arch.operands.size());
  const int nb = static_cast<int>(arch.buffers.size());
  const int nc = static_cast<int>(arch.capabilities.size());
  return {matricize(tensors.positive, no, nb, nc), matricize(tensors.negative, no, nb, nc)};
}

}  // namespace hfg
