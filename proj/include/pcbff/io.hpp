#pragma once

#include "pcbff/bff.hpp"
#include "pcbff/pcstats.hpp"
#include "pcbff/simulate.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pcbff::io {

/// Shortest decimal text that parses back to the same double; "inf", "-inf", "nan".
[[nodiscard]] std::string format_double(double value);

/// Parses a full field as a double. Throws DomainError naming `what` on failure.
[[nodiscard]] double parse_double(std::string_view text, std::string_view what);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, header required, '.' decimal, no quoting.
[[nodiscard]] CsvTable read_csv(std::istream& in);

/// Column selection for read_data_csv. Empty names mean: response = first
/// column, target = second column; every other column conditions.
struct ColumnSpec {
    std::string response;
    std::string target;
};

[[nodiscard]] pcstats::DataMatrix data_from_table(const CsvTable& table, const ColumnSpec& spec);
[[nodiscard]] pcstats::DataMatrix read_data_csv(const std::string& path, const ColumnSpec& spec);

void write_curve_csv(std::ostream& out, const bff::BffCurve& curve);
void write_curve_json(std::ostream& out, const bff::BffCurve& curve);

/// One row per replicate. Per-grid columns log_bff@ω and point_log_bf@ω cover
/// the scenario grid; a field is empty where the cell did not evaluate that ω.
void write_oc_records_csv(std::ostream& out, const simulate::OcResult& result);

/// One row per (cell, ω*) with the grid aggregates followed by the cell summary.
void write_oc_aggregates_csv(std::ostream& out, const simulate::OcResult& result);

/// Rebuilds cells (records and grids, then re-aggregated) from a records CSV.
[[nodiscard]] std::vector<simulate::OcCell> read_oc_records_csv(std::istream& in);

[[nodiscard]] simulate::SimScenario scenario_from_json(std::string_view text);
[[nodiscard]] simulate::SimScenario load_scenario(const std::string& path);
[[nodiscard]] std::string scenario_to_json(const simulate::SimScenario& scenario);

}  // namespace pcbff::io
