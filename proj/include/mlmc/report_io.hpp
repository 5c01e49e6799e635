#pragma once

#include "mlmc/engine.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>

namespace mlmc {

/// Deterministic fields of a report; wall_time_s is left out so that reruns
/// with the same flags serialize byte-identically.
nlohmann::json report_to_json(const EstimateReport& r);

/// Inverse of report_to_json; wall_time_s is 0. Throws ParseError on missing
/// or mistyped fields and DimensionError on ragged value arrays.
EstimateReport report_from_json(const nlohmann::json& j);
EstimateReport read_report(const std::filesystem::path& path);

/// One row per value: index,value,sample_variance,ci_halfwidth, preceded by
/// `# key=value` lines for the scalar fields.
void write_report_csv(const EstimateReport& r, std::ostream& out);

} // namespace mlmc
