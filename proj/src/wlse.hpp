#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfnmcf.hpp"
#include "incidence.hpp"
#include "qp.hpp"
#include "types.hpp"

namespace hfg {

// One exogenous data series: which capabilities its buckets aggregate over
// (capability footprint) and which model steps each bucket covers (temporal
// footprint, 1-based steps, disjoint across buckets).
struct MeasurementSeries {
  std::string id;
  std::vector<int> capability_footprint;
  std::vector<std::vector<int>> temporal_footprint;
  std::vector<double> values;  // GJ per bucket
  std::optional<double> weight_override;

  int buckets() const { return static_cast<int>(values.size()); }
};

struct AggregationMatrices {
  SparseMatrix d_cap;   // series x capabilities
  SparseMatrix d_time;  // steps x data buckets
  SparseMatrix d_u;     // d_time^T (x) d_cap
};

// Throws Error(validation) when the series breaks a footprint or value
// invariant: empty/unknown footprints, overlapping buckets, steps outside
// the horizon, non-finite values, non-positive weight override.
void validate_measurement(const MeasurementSeries& series, int n_capabilities, int horizon);

// Row m has a 1 in every capability column of series m's footprint.
SparseMatrix build_capability_aggregation(const std::vector<MeasurementSeries>& measurements,
                                          int n_capabilities);

// Entry (k, b) is 1 iff step k belongs to bucket b. Buckets must be disjoint.
SparseMatrix build_temporal_aggregation(int horizon, const std::vector<std::vector<int>>& buckets);

// Kronecker assembly of the combined measurement map over vec-stacked flows.
SparseMatrix build_measurement_matrix(const SparseMatrix& d_cap, const SparseMatrix& d_time);

// Sums finer-than-model samples into per-step buckets. A sample bucket that
// straddles several model steps or falls outside {1..K} is an error; values
// are never prorated.
MeasurementSeries downsample_fine_data(const MeasurementSeries& series, int horizon);

struct WeightingScheme {
  std::vector<double> f_error;  // per series, > 0
  double f_flow = 0.0;          // scalar applied to every flow variable
};

// Error weights are inversely proportional to the square of each series'
// maximum; the flow weight is two orders of magnitude below the smallest
// squared maximum. A series whose maximum is 0 gets weight 1.
WeightingScheme compute_weights(const std::vector<MeasurementSeries>& measurements);

struct CapacityBound {
  int capability = 0;
  double bound = 0.0;  // GJ per time step
};
using CapacitySet = std::vector<CapacityBound>;

// Bounds recorded on the architecture's capabilities.
CapacitySet capacities_from(const SystemArchitecture& arch);

// Decision vector: flows u(k, capability) for k = 1..K+1 (step K+1 pinned to
// zero), then one error variable per (series, bucket).
struct WlseLayout {
  int n_capabilities = 0;
  int horizon = 1;
  int n_error = 0;
  std::vector<std::pair<int, int>> error_ref;  // error var -> (series, bucket)
  std::vector<int> series_error_start;

  int u_index(int k, int cap) const { return (k - 1) * n_capabilities + cap; }
  int error_offset() const { return n_capabilities * (horizon + 1); }
  int error_index(int e) const { return error_offset() + e; }
  int total() const { return error_offset() + n_error; }
};

struct WlseProgram {
  QuadraticProgram qp;
  WlseLayout layout;
  std::vector<RowInfo> eq_rows;
  std::vector<RowInfo> ineq_rows;
  WeightingScheme weights;
};

// Steady-state collapse: conservation rows per (operand, buffer, step),
// one measurement row per (series, bucket) with its error variable, final
// condition pinning step K+1, capacity rows, and nonnegative flows.
WlseProgram assemble_wlse(const SystemArchitecture& arch,
                          const std::vector<MeasurementSeries>& measurements,
                          const CapacitySet& capacities, int horizon, double dt,
                          std::optional<double> alpha_override = std::nullopt);

struct MeasurementError {
  int series = 0;
  int bucket = 0;
  double measured = 0.0;
  double estimated = 0.0;  // aggregate of the optimal flows
  double error = 0.0;      // estimated - measured
  double weight = 0.0;
  double contribution = 0.0;  // weight * error^2
};

struct CapacityDual {
  int capability = 0;
  int step = 0;  // 1-based
  double dual = 0.0;
  double bound = 0.0;
  double flow = 0.0;
};

struct EstimationResult {
  std::vector<std::vector<double>> flows;  // [k-1][capability], k = 1..K
  std::vector<MeasurementError> errors;
  double objective = 0.0;
  QpResiduals residuals;
  double conservation_residual = 0.0;  // max_k |M u[k] dt|_inf / (1 + |u[k]|_inf)
  std::vector<CapacityDual> binding_capacities;
  int iterations = 0;
};

struct EstimateOptions {
  double tol = 1e-8;
  std::optional<double> alpha;  // overrides the computed flow weight
  std::string dump_qp_path;     // empty -> no dump
};

// Assembles, solves, and maps the solution back to per-step flows with a
// fresh conservation check. Non-optimal solver outcomes raise Error(solver).
EstimationResult estimate(const SystemArchitecture& arch,
                          const std::vector<MeasurementSeries>& measurements,
                          const CapacitySet& capacities, int horizon, double dt,
                          const EstimateOptions& options = {});

enum class Grouping { process, region, both };

std::optional<Grouping> parse_grouping(std::string_view s);
const char* to_string(Grouping g);

struct ErrorReportRow {
  std::string group;
  double imposed_flow = 0.0;    // sum of measured values
  double abs_error = 0.0;       // sum of |error| over the group's rows
  double weighted_error = 0.0;  // sum of weighted contributions
};

// Groups measurement errors by process type and/or region, sorted from the
// greatest absolute error down, ties by group id.
std::vector<ErrorReportRow> error_report(const EstimationResult& result,
                                         const std::vector<MeasurementSeries>& measurements,
                                         const SystemArchitecture& arch, Grouping grouping);

}  // namespace hfg
