#pragma once

#include <string>
#include <vector>

#include "instance_io.hpp"
#include "wlse.hpp"

namespace hfg {

// Writes flows.csv, errors.csv, sankey.json, choropleth.csv, interstate.csv,
// and summary.json into out_dir. Cross-aggregate consistency is verified at
// export time; a mismatch raises Error(internal).
void export_results(const EstimationResult& result, const Instance& instance,
                    const std::string& out_dir);

// Rebuilds the grouped error table from an exported result directory.
std::vector<ErrorReportRow> report_from_dir(const std::string& dir, Grouping grouping);

std::string render_report_table(const std::vector<ErrorReportRow>& rows);
std::string report_to_csv(const std::vector<ErrorReportRow>& rows);

}  // namespace hfg
