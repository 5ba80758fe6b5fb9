#include "wlse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"

namespace hfg {

void validate_measurement(const MeasurementSeries& s, int n_capabilities, int horizon) {
  if (s.capability_footprint.empty()) {
    throw Error(ErrorKind::validation, "measurement '" + s.id + "' has an empty capability footprint");
  }
  for (int c : s.capability_footprint) {
    if (c < 0 || c >= n_capabilities) {
      throw Error(ErrorKind::validation,
                  "measurement '" + s.id + "' references unknown capability index " + std::to_string(c));
    }
  }
  if (s.temporal_footprint.empty()) {
    throw Error(ErrorKind::validation, "measurement '" + s.id + "' has an empty temporal footprint");
  }
  if (s.temporal_footprint.size() != s.values.size()) {
    throw Error(ErrorKind::validation,
                "measurement '" + s.id + "' has " + std::to_string(s.values.size()) +
                    " values for " + std::to_string(s.temporal_footprint.size()) + " buckets");
  }
  std::set<int> seen;
  for (const std::vector<int>& bucket : s.temporal_footprint) {
    if (bucket.empty()) {
      throw Error(ErrorKind::validation, "measurement '" + s.id + "' has an empty bucket");
    }
    for (int k : bucket) {
      if (k < 1 || k > horizon) {
        throw Error(ErrorKind::validation, "measurement '" + s.id + "' references step " +
                                               std::to_string(k) + " outside 1.." +
                                               std::to_string(horizon));
      }
      if (!seen.insert(k).second) {
        throw Error(ErrorKind::validation, "measurement '" + s.id +
                                               "' has overlapping buckets at step " +
                                               std::to_string(k));
      }
    }
  }
  for (double v : s.values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::validation, "measurement '" + s.id + "' has a non-finite value");
    }
  }
  if (s.weight_override && !(*s.weight_override > 0.0)) {
    throw Error(ErrorKind::validation, "measurement '" + s.id + "' weight must be positive");
  }
}

SparseMatrix build_capability_aggregation(const std::vector<MeasurementSeries>& measurements,
                                          int n_capabilities) {
  std::vector<Triplet> t;
  for (size_t m = 0; m < measurements.size(); ++m) {
    const MeasurementSeries& s = measurements[m];
    if (s.capability_footprint.empty()) {
      throw Error(ErrorKind::validation,
                  "measurement '" + s.id + "' has an empty capability footprint");
    }
    std::set<int> unique(s.capability_footprint.begin(), s.capability_footprint.end());
    for (int c : unique) {
      if (c < 0 || c >= n_capabilities) {
        throw Error(ErrorKind::validation, "measurement '" + s.id +
                                               "' references unknown capability index " +
                                               std::to_string(c));
      }
      t.push_back({static_cast<int>(m), c, 1.0});
    }
  }
  return SparseMatrix::from_triplets(static_cast<int>(measurements.size()), n_capabilities,
                                     std::move(t));
}

SparseMatrix build_temporal_aggregation(int horizon,
                                        const std::vector<std::vector<int>>& buckets) {
  std::vector<Triplet> t;
  std::set<int> seen;
  for (size_t b = 0; b < buckets.size(); ++b) {
    for (int k : buckets[b]) {
      if (k < 1 || k > horizon) {
        throw Error(ErrorKind::validation,
                    "bucket step " + std::to_string(k) + " outside 1.." + std::to_string(horizon));
      }
      if (!seen.insert(k).second) {
        throw Error(ErrorKind::validation,
                    "overlapping buckets: step " + std::to_string(k) + " appears twice");
      }
      t.push_back({k - 1, static_cast<int>(b), 1.0});
    }
  }
  return SparseMatrix::from_triplets(horizon, static_cast<int>(buckets.size()), std::move(t));
}

SparseMatrix build_measurement_matrix(const SparseMatrix& d_cap, const SparseMatrix& d_time) {
  return SparseMatrix::kronecker(d_time.transposed(), d_cap);
}

MeasurementSeries downsample_fine_data(const MeasurementSeries& series, int horizon) {
  std::map<int, double> per_step;
  for (size_t b = 0; b < series.temporal_footprint.size(); ++b) {
    const std::vector<int>& steps = series.temporal_footprint[b];
    if (steps.size() != 1) {
      throw Error(ErrorKind::validation,
                  "measurement '" + series.id + "' sample " + std::to_string(b) +
                      " straddles " + std::to_string(steps.size()) +
                      " model steps; values are not prorated");
    }
    const int k = steps[0];
    if (k < 1 || k > horizon) {
      throw Error(ErrorKind::validation, "measurement '" + series.id + "' sample " +
                                             std::to_string(b) + " falls outside the horizon at step " +
                                             std::to_string(k));
    }
    if (b >= series.values.size()) {
      throw Error(ErrorKind::validation, "measurement '" + series.id + "' is missing values");
    }
    per_step[k] += series.values[b];
  }
  MeasurementSeries out;
  out.id = series.id;
  out.capability_footprint = series.capability_footprint;
  out.weight_override = series.weight_override;
  for (const auto& [k, v] : per_step) {
    out.temporal_footprint.push_back({k});
    out.values.push_back(v);
  }
  return out;
}

WeightingScheme compute_weights(const std::vector<MeasurementSeries>& measurements) {
  if (measurements.empty()) {
    throw Error(ErrorKind::argument, "weighting requires at least one measurement");
  }
  WeightingScheme w;
  double min_sq_max = std::numeric_limits<double>::infinity();
  for (const MeasurementSeries& s : measurements) {
    double max_value = -std::numeric_limits<double>::infinity();
    double max_sq = 0.0;
    for (double v : s.values) {
      max_value = std::max(max_value, v);
      max_sq = std::max(max_sq, v * v);
    }
    if (s.values.empty()) max_value = 0.0;
    double weight = 1.0;  // degenerate rule: an all-zero series keeps weight 1
    if (max_value != 0.0) weight = 1.0 / (max_value * max_value);
    if (s.weight_override) weight = *s.weight_override;
    w.f_error.push_back(weight);
    min_sq_max = std::min(min_sq_max, max_sq);
  }
  w.f_flow = 0.01 * min_sq_max;
  return w;
}

CapacitySet capacities_from(const SystemArchitecture& arch) {
  CapacitySet out;
  for (size_t c = 0; c < arch.capabilities.size(); ++c) {
    if (arch.capabilities[c].capacity) {
      out.push_back({static_cast<int>(c), *arch.capabilities[c].capacity});
    }
  }
  return out;
}

WlseProgram assemble_wlse(const SystemArchitecture& arch,
                          const std::vector<MeasurementSeries>& measurements,
                          const CapacitySet& capacities, int horizon, double dt,
                          std::optional<double> alpha_override) {
  if (horizon < 1) throw Error(ErrorKind::argument, "horizon must be at least 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::argument, "time step length must be positive");
  }
  const int nc = static_cast<int>(arch.capabilities.size());
  for (const MeasurementSeries& s : measurements) validate_measurement(s, nc, horizon);
  for (const CapacityBound& b : capacities) {
    if (b.capability < 0 || b.capability >= nc) {
      throw Error(ErrorKind::validation,
                  "capacity bound references unknown capability index " +
                      std::to_string(b.capability));
    }
    if (!(b.bound >= 0.0) || !std::isfinite(b.bound)) {
      throw Error(ErrorKind::validation, "capacity bound for '" +
                                             arch.capabilities[static_cast<size_t>(b.capability)].id +
                                             "' must be nonnegative");
    }
  }

  WlseProgram out;
  WlseLayout& layout = out.layout;
  layout.n_capabilities = nc;
  layout.horizon = horizon;
  for (size_t m = 0; m < measurements.size(); ++m) {
    layout.series_error_start.push_back(layout.n_error);
    for (int b = 0; b < measurements[m].buckets(); ++b) {
      layout.error_ref.push_back({static_cast<int>(m), b});
      ++layout.n_error;
    }
  }

  if (measurements.empty()) {
    out.weights.f_flow = alpha_override.value_or(0.0);
  } else {
    out.weights = compute_weights(measurements);
    if (alpha_override) out.weights.f_flow = *alpha_override;
  }
  if (out.weights.f_flow < 0.0) {
    throw Error(ErrorKind::argument, "flow weight must be nonnegative");
  }

  const IncidenceMatrices m = incidence_matrices(arch);
  const SparseMatrix balance = SparseMatrix::subtract(m.m_plus, m.m_minus);
  std::vector<std::vector<std::pair<int, double>>> balance_rows(
      static_cast<size_t>(balance.rows()));
  for (const Triplet& t : balance.entries()) {
    balance_rows[static_cast<size_t>(t.row)].push_back({t.col, t.value});
  }

  std::vector<Triplet> eq;
  std::vector<double> b_eq;
  auto add_eq = [&](const std::string& block, int k, std::string entity, double rhs) {
    out.eq_rows.push_back({block, k, std::move(entity)});
    b_eq.push_back(rhs);
    return static_cast<int>(b_eq.size()) - 1;
  };

  // Conservation at every (operand, buffer) place and step.
  for (int k = 1; k <= horizon; ++k) {
    for (int p = 0; p < arch.place_count(); ++p) {
      const int row = add_eq("conservation", k, arch.place_label(p), 0.0);
      for (const auto& [cap, w] : balance_rows[static_cast<size_t>(p)]) {
        eq.push_back({row, layout.u_index(k, cap), w * dt});
      }
    }
  }
  // Measurement rows: aggregate flow minus the error variable equals the data.
  for (size_t mi = 0; mi < measurements.size(); ++mi) {
    const MeasurementSeries& s = measurements[mi];
    std::set<int> footprint(s.capability_footprint.begin(), s.capability_footprint.end());
    for (int b = 0; b < s.buckets(); ++b) {
      const int row = add_eq("measurement", 0, s.id + "[" + std::to_string(b) + "]",
                             s.values[static_cast<size_t>(b)]);
      for (int k : s.temporal_footprint[static_cast<size_t>(b)]) {
        for (int cap : footprint) eq.push_back({row, layout.u_index(k, cap), 1.0});
      }
      eq.push_back({row, layout.error_index(layout.series_error_start[mi] + b), -1.0});
    }
  }
  // Final condition: the (K+1)-th firing block is pinned to zero.
  for (int cap = 0; cap < nc; ++cap) {
    const int row = add_eq("final_condition", horizon + 1, arch.capabilities[static_cast<size_t>(cap)].id, 0.0);
    eq.push_back({row, layout.u_index(horizon + 1, cap), 1.0});
  }

  std::vector<Triplet> ineq;
  std::vector<double> e_ineq;
  auto add_ineq = [&](const std::string& block, int k, std::string entity, double rhs) {
    out.ineq_rows.push_back({block, k, std::move(entity)});
    e_ineq.push_back(rhs);
    return static_cast<int>(e_ineq.size()) - 1;
  };
  for (int k = 1; k <= horizon; ++k) {
    for (const CapacityBound& b : capacities) {
      const int row = add_ineq("capacity", k,
                               arch.capabilities[static_cast<size_t>(b.capability)].id, b.bound);
      ineq.push_back({row, layout.u_index(k, b.capability), 1.0});
    }
  }
  for (int k = 1; k <= horizon; ++k) {
    for (int cap = 0; cap < nc; ++cap) {
      const int row = add_ineq("nonnegative_flow", k, arch.capabilities[static_cast<size_t>(cap)].id, 0.0);
      ineq.push_back({row, layout.u_index(k, cap), -1.0});
    }
  }

  out.qp.f_quad.assign(static_cast<size_t>(layout.total()), 0.0);
  out.qp.f_lin.assign(static_cast<size_t>(layout.total()), 0.0);
  for (int i = 0; i < layout.error_offset(); ++i) {
    out.qp.f_quad[static_cast<size_t>(i)] = out.weights.f_flow;
  }
  for (int e = 0; e < layout.n_error; ++e) {
    out.qp.f_quad[static_cast<size_t>(layout.error_index(e))] =
        out.weights.f_error[static_cast<size_t>(layout.error_ref[static_cast<size_t>(e)].first)];
  }
  out.qp.a_eq = SparseMatrix::from_triplets(static_cast<int>(b_eq.size()), layout.total(), std::move(eq));
  out.qp.b_eq = std::move(b_eq);
  out.qp.d_ineq =
      SparseMatrix::from_triplets(static_cast<int>(e_ineq.size()), layout.total(), std::move(ineq));
  out.qp.e_ineq = std::move(e_ineq);
  out.qp.validate();
  return out;
}

EstimationResult estimate(const SystemArchitecture& arch,
                          const std::vector<MeasurementSeries>& measurements,
                          const CapacitySet& capacities, int horizon, double dt,
                          const EstimateOptions& options) {
  require_valid(arch);
  if (!(options.tol > 0.0)) {
    throw Error(ErrorKind::argument, "solver tolerance must be positive");
  }
  WlseProgram program = assemble_wlse(arch, measurements, capacities, horizon, dt, options.alpha);
  if (!options.dump_qp_path.empty()) dump_qp_file(options.dump_qp_path, program.qp);

  QpOptions qopts;
  qopts.tol_abs = options.tol;
  qopts.tol_rel = options.tol;
  QpSolution sol = solve_qp(program.qp, qopts);
  if (sol.status != QpStatus::optimal) {
    std::ostringstream os;
    os << "estimation solve ended with status " << to_string(sol.status) << " after "
       << sol.iterations << " iteration(s)";
    if (sol.status == QpStatus::infeasible) {
      os << "; capacity, conservation, and nonnegativity rows conflict "
            "(see the constraint provenance for row identities)";
    }
    throw Error(ErrorKind::solver, os.str());
  }

  const WlseLayout& layout = program.layout;
  EstimationResult result;
  result.objective = sol.objective;
  result.residuals = sol.residuals;
  result.iterations = sol.iterations;
  result.flows.resize(static_cast<size_t>(horizon));
  for (int k = 1; k <= horizon; ++k) {
    std::vector<double>& row = result.flows[static_cast<size_t>(k - 1)];
    row.resize(static_cast<size_t>(layout.n_capabilities));
    for (int c = 0; c < layout.n_capabilities; ++c) {
      row[static_cast<size_t>(c)] = sol.x[static_cast<size_t>(layout.u_index(k, c))];
    }
  }

  // The error variables are recomputed from the flows so the measurement
  // identity holds to machine precision in the reported result.
  for (size_t mi = 0; mi < measurements.size(); ++mi) {
    const MeasurementSeries& s = measurements[mi];
    std::set<int> footprint(s.capability_footprint.begin(), s.capability_footprint.end());
    for (int b = 0; b < s.buckets(); ++b) {
      MeasurementError e;
      e.series = static_cast<int>(mi);
      e.bucket = b;
      e.measured = s.values[static_cast<size_t>(b)];
      double agg = 0.0;
      for (int k : s.temporal_footprint[static_cast<size_t>(b)]) {
        for (int cap : footprint) agg += result.flows[static_cast<size_t>(k - 1)][static_cast<size_t>(cap)];
      }
      e.estimated = agg;
      e.error = agg - e.measured;
      e.weight = program.weights.f_error[mi];
      e.contribution = e.weight * e.error * e.error;
      result.errors.push_back(e);
    }
  }

  // Fresh conservation check straight from the incidence matrices.
  const IncidenceMatrices m = incidence_matrices(arch);
  const SparseMatrix balance = SparseMatrix::subtract(m.m_plus, m.m_minus);
  for (int k = 1; k <= horizon; ++k) {
    const std::vector<double>& u = result.flows[static_cast<size_t>(k - 1)];
    std::vector<double> r = balance.multiply(u);
    double unorm = 0.0;
    for (double v : u) unorm = std::max(unorm, std::fabs(v));
    double rnorm = 0.0;
    for (double v : r) rnorm = std::max(rnorm, std::fabs(v) * dt);
    result.conservation_residual =
        std::max(result.conservation_residual, rnorm / (1.0 + unorm));
  }

  for (size_t j = 0; j < program.ineq_rows.size(); ++j) {
    const RowInfo& info = program.ineq_rows[j];
    if (info.block != "capacity") continue;
    const double dual = sol.duals_ineq[j];
    if (dual <= 1e-10) continue;
    CapacityDual cd;
    cd.capability = arch.capability_index(info.entity);
    cd.step = info.k;
    cd.dual = dual;
    cd.bound = program.qp.e_ineq[j];
    cd.flow = result.flows[static_cast<size_t>(info.k - 1)][static_cast<size_t>(cd.capability)];
    result.binding_capacities.push_back(cd);
  }
  return result;
}

std::optional<Grouping> parse_grouping(std::string_view s) {
  if (s == "process") return Grouping::process;
  if (s == "region") return Grouping::region;
  if (s == "both") return Grouping::both;
  return std::nullopt;
}

const char* to_string(Grouping g) {
  switch (g) {
    case Grouping::process: return "process";
    case Grouping::region: return "region";
    case Grouping::both: return "both";
  }
  return "both";
}

namespace {

std::string join_sorted(std::set<std::string> parts) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out += "+";
    out += p;
  }
  return out;
}

}  // namespace

std::vector<ErrorReportRow> error_report(const EstimationResult& result,
                                         const std::vector<MeasurementSeries>& measurements,
                                         const SystemArchitecture& arch, Grouping grouping) {
  std::vector<std::string> series_group(measurements.size());
  for (size_t mi = 0; mi < measurements.size(); ++mi) {
    std::set<std::string> processes;
    std::set<std::string> regions;
    for (int c : measurements[mi].capability_footprint) {
      const Capability& cap = arch.capabilities[static_cast<size_t>(c)];
      processes.insert(process_type_label(cap));
      regions.insert(capability_region(arch, cap));
    }
    switch (grouping) {
      case Grouping::process: series_group[mi] = join_sorted(processes); break;
      case Grouping::region: series_group[mi] = join_sorted(regions); break;
      case Grouping::both:
        series_group[mi] = join_sorted(processes) + " | " + join_sorted(regions);
        break;
    }
  }

  std::map<std::string, ErrorReportRow> groups;
  for (const MeasurementError& e : result.errors) {
    const std::string& key = series_group[static_cast<size_t>(e.series)];
    ErrorReportRow& row = groups[key];
    row.group = key;
    row.imposed_flow += e.measured;
    row.abs_error += std::fabs(e.error);
    row.weighted_error += e.contribution;
  }

  std::vector<ErrorReportRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, row] : groups) rows.push_back(std::move(row));
  std::sort(rows.begin(), rows.end(), [](const ErrorReportRow& a, const ErrorReportRow& b) {
    if (a.abs_error != b.abs_error) return a.abs_error > b.abs_error;
    return a.group < b.group;
  });
  return rows;
}

}  // namespace hfg
