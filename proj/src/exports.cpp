#include "exports.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "error.hpp"
#include "json.hpp"

namespace hfg {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kFlowEps = 1e-12;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

struct NodeFlow {
  std::map<std::string, double> produced;  // by process label
  std::map<std::string, double> consumed;
};

}  // namespace

void export_results(const EstimationResult& result, const Instance& instance,
                    const std::string& out_dir) {
  const SystemArchitecture& arch = instance.arch;
  const int K = static_cast<int>(result.flows.size());
  const int nc = static_cast<int>(arch.capabilities.size());
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);

  // flows.csv: asset-level flows.
  {
    std::ostringstream os;
    os << "capability,step,flow_gj\n";
    for (int c = 0; c < nc; ++c) {
      for (int k = 1; k <= K; ++k) {
        os << csv_field(arch.capabilities[static_cast<size_t>(c)].id) << ',' << k << ','
           << format_double(result.flows[static_cast<size_t>(k - 1)][static_cast<size_t>(c)])
           << '\n';
      }
    }
    write_text_file((dir / "flows.csv").string(), os.str());
  }

  // errors.csv: per-(series, bucket) measurement reconciliation.
  {
    std::ostringstream os;
    os << "series,bucket,process,region,measured,estimated,error,weight,weighted_contribution\n";
    for (const MeasurementError& e : result.errors) {
      const MeasurementSeries& s = instance.measurements[static_cast<size_t>(e.series)];
      std::set<std::string> processes;
      std::set<std::string> regions;
      for (int c : s.capability_footprint) {
        processes.insert(process_type_label(arch.capabilities[static_cast<size_t>(c)]));
        regions.insert(capability_region(arch, arch.capabilities[static_cast<size_t>(c)]));
      }
      auto join = [](const std::set<std::string>& parts) {
        std::string out;
        for (const std::string& p : parts) {
          if (!out.empty()) out += "+";
          out += p;
        }
        return out;
      };
      os << csv_field(s.id) << ',' << e.bucket << ',' << csv_field(join(processes)) << ','
         << csv_field(join(regions)) << ',' << format_double(e.measured) << ','
         << format_double(e.estimated) << ',' << format_double(e.error) << ','
         << format_double(e.weight) << ',' << format_double(e.contribution) << '\n';
    }
    write_text_file((dir / "errors.csv").string(), os.str());
  }

  // Per-step process-type flows power both the sankey export and the
  // consistency checks below.
  std::vector<std::map<std::string, NodeFlow>> step_places(static_cast<size_t>(K));
  std::vector<std::map<std::string, double>> withdraw_by_label(static_cast<size_t>(K));
  for (int k = 1; k <= K; ++k) {
    auto& places = step_places[static_cast<size_t>(k - 1)];
    for (int c = 0; c < nc; ++c) {
      const Capability& cap = arch.capabilities[static_cast<size_t>(c)];
      const double u = result.flows[static_cast<size_t>(k - 1)][static_cast<size_t>(c)];
      if (std::fabs(u) <= kFlowEps) continue;
      const std::string label = process_type_label(cap);
      for (const OperandFlow& f : cap.process.outputs) {
        places[f.operand + "@" + cap.destination].produced[label] += u * f.coefficient;
      }
      for (const OperandFlow& f : cap.process.inputs) {
        places[f.operand + "@" + cap.origin].consumed[label] += u * f.coefficient;
      }
      if (cap.process.kind == ProcessKind::withdrawal) {
        withdraw_by_label[static_cast<size_t>(k - 1)][label] += u;
      }
    }
  }

  // sankey.json: per step, process-type nodes and proportionally attributed
  // producer-to-consumer links.
  {
    Json doc;
    doc["steps"] = Json::array();
    for (int k = 1; k <= K; ++k) {
      std::set<std::string> labels;
      std::map<std::pair<std::string, std::string>, double> links;
      for (const auto& [place, flow] : step_places[static_cast<size_t>(k - 1)]) {
        double total_in = 0.0;
        for (const auto& [label, v] : flow.produced) total_in += v;
        if (total_in <= kFlowEps) continue;
        for (const auto& [plabel, pv] : flow.produced) {
          labels.insert(plabel);
          for (const auto& [clabel, cv] : flow.consumed) {
            labels.insert(clabel);
            links[{plabel, clabel}] += pv * (cv / total_in);
          }
        }
      }
      std::vector<std::string> nodes(labels.begin(), labels.end());
      std::map<std::string, int> node_index;
      for (size_t i = 0; i < nodes.size(); ++i) node_index[nodes[i]] = static_cast<int>(i);
      Json step;
      step["step"] = k;
      step["nodes"] = nodes;
      step["links"] = Json::array();
      for (const auto& [pair, value] : links) {
        if (value <= kFlowEps) continue;
        Json link;
        link["source"] = node_index[pair.first];
        link["target"] = node_index[pair.second];
        link["value"] = value;
        step["links"].push_back(std::move(link));
      }
      doc["steps"].push_back(std::move(step));
    }
    write_text_file((dir / "sankey.json").string(), doc.dump(2) + "\n");
  }

  // choropleth.csv: withdrawal intensity per (region, operand, step).
  std::map<std::string, std::map<std::string, std::vector<double>>> demand;  // region -> operand
  for (int c = 0; c < nc; ++c) {
    const Capability& cap = arch.capabilities[static_cast<size_t>(c)];
    if (cap.process.kind != ProcessKind::withdrawal) continue;
    const std::string region = capability_region(arch, cap);
    for (const OperandFlow& f : cap.process.inputs) {
      std::vector<double>& per_step = demand[region][f.operand];
      per_step.resize(static_cast<size_t>(K), 0.0);
      for (int k = 1; k <= K; ++k) {
        per_step[static_cast<size_t>(k - 1)] +=
            result.flows[static_cast<size_t>(k - 1)][static_cast<size_t>(c)] * f.coefficient;
      }
    }
  }
  {
    std::ostringstream os;
    os << "region,operand,step,flow_gj\n";
    for (const auto& [region, ops] : demand) {
      for (const auto& [operand, per_step] : ops) {
        for (int k = 1; k <= K; ++k) {
          os << csv_field(region) << ',' << csv_field(operand) << ',' << k << ','
             << format_double(per_step[static_cast<size_t>(k - 1)]) << '\n';
        }
      }
    }
    write_text_file((dir / "choropleth.csv").string(), os.str());
  }

  // interstate.csv: transports whose endpoints sit in different regions.
  {
    std::ostringstream os;
    os << "origin_region,destination_region,operand,step,flow_gj\n";
    for (int c = 0; c < nc; ++c) {
      const Capability& cap = arch.capabilities[static_cast<size_t>(c)];
      if (cap.process.kind != ProcessKind::transport) continue;
      const int ob = arch.buffer_index(cap.origin);
      const int db = arch.buffer_index(cap.destination);
      const std::string& from = arch.buffers[static_cast<size_t>(ob)].location;
      const std::string& to = arch.buffers[static_cast<size_t>(db)].location;
      if (from == to) continue;
      const std::string& operand = cap.process.inputs[0].operand;
      for (int k = 1; k <= K; ++k) {
        os << csv_field(from) << ',' << csv_field(to) << ',' << csv_field(operand) << ',' << k
           << ',' << format_double(result.flows[static_cast<size_t>(k - 1)][static_cast<size_t>(c)])
           << '\n';
      }
    }
    write_text_file((dir / "interstate.csv").string(), os.str());
  }

  // summary.json
  {
    Json doc;
    doc["status"] = "optimal";
    doc["objective"] = result.objective;
    doc["iterations"] = result.iterations;
    doc["conservation_residual"] = result.conservation_residual;
    doc["horizon"] = K;
    doc["capabilities"] = nc;
    doc["measurements"] = instance.measurements.size();
    doc["binding_capacities"] = Json::array();
    for (const CapacityDual& b : result.binding_capacities) {
      Json entry;
      entry["capability"] = arch.capabilities[static_cast<size_t>(b.capability)].id;
      entry["step"] = b.step;
      entry["dual"] = b.dual;
      entry["bound"] = b.bound;
      entry["flow"] = b.flow;
      doc["binding_capacities"].push_back(std::move(entry));
    }
    write_text_file((dir / "summary.json").string(), doc.dump(2) + "\n");
  }

  // Consistency: the choropleth aggregate must match the withdrawal totals
  // seen by the sankey path, summed per (operand, step) over regions.
  for (int k = 1; k <= K; ++k) {
    std::map<std::string, double> by_operand;
    for (const auto& [region, ops] : demand) {
      for (const auto& [operand, per_step] : ops) {
        by_operand[operand] += per_step[static_cast<size_t>(k - 1)];
      }
    }
    std::map<std::string, double> by_label;
    for (int c = 0; c < nc; ++c) {
      const Capability& cap = arch.capabilities[static_cast<size_t>(c)];
      if (cap.process.kind != ProcessKind::withdrawal) continue;
      const double u = result.flows[static_cast<size_t>(k - 1)][static_cast<size_t>(c)];
      for (const OperandFlow& f : cap.process.inputs) by_label[f.operand] += u * f.coefficient;
    }
    for (const auto& [operand, total] : by_operand) {
      const double other = by_label.count(operand) ? by_label[operand] : 0.0;
      if (std::fabs(total - other) > 1e-9 * (1.0 + std::fabs(total))) {
        throw Error(ErrorKind::internal, "export aggregates disagree for operand '" + operand +
                                             "' at step " + std::to_string(k));
      }
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

}  // namespace

std::vector<ErrorReportRow> report_from_dir(const std::string& dir, Grouping grouping) {
  const std::string path = (std::filesystem::path(dir) / "errors.csv").string();
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::parse, path + ": missing header");
  }
  const std::vector<std::string> header = split_csv_line(line);
  const std::vector<std::string> expected = {"series",    "bucket", "process",
                                             "region",    "measured", "estimated",
                                             "error",     "weight", "weighted_contribution"};
  if (header != expected) {
    throw Error(ErrorKind::parse, path + ": unexpected header");
  }
  std::map<std::string, ErrorReportRow> groups;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != expected.size()) {
      throw Error(ErrorKind::parse, path + ": malformed row '" + line + "'");
    }
    std::string key;
    switch (grouping) {
      case Grouping::process: key = f[2]; break;
      case Grouping::region: key = f[3]; break;
      case Grouping::both: key = f[2] + " | " + f[3]; break;
    }
    ErrorReportRow& row = groups[key];
    row.group = key;
    row.imposed_flow += std::stod(f[4]);
    row.abs_error += std::fabs(std::stod(f[6]));
    row.weighted_error += std::stod(f[8]);
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

std::string render_report_table(const std::vector<ErrorReportRow>& rows) {
  size_t width = 5;
  for (const ErrorReportRow& r : rows) width = std::max(width, r.group.size());
  std::ostringstream os;
  os << std::left;
  os.width(static_cast<std::streamsize>(width));
  os << "group";
  os << "  imposed_flow  abs_error  weighted_error\n";
  for (const ErrorReportRow& r : rows) {
    os.width(static_cast<std::streamsize>(width));
    os << r.group;
    os << "  " << format_double(r.imposed_flow) << "  " << format_double(r.abs_error) << "  "
       << format_double(r.weighted_error) << "\n";
  }
  return os.str();
}

std::string report_to_csv(const std::vector<ErrorReportRow>& rows) {
  std::ostringstream os;
  os << "group,imposed_flow,abs_error,weighted_error\n";
  for (const ErrorReportRow& r : rows) {
    os << csv_field(r.group) << ',' << format_double(r.imposed_flow) << ','
       << format_double(r.abs_error) << ',' << format_double(r.weighted_error) << '\n';
  }
  return os.str();
}

}  // namespace hfg
