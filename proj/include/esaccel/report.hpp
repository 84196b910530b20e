#pragma once

// Text outputs: CSV traces, key-value summaries and static SVG charts.
// Everything here is byte-deterministic and locale independent.

#include <esaccel/scenarios.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace esaccel {

/// Shortest general form with at most 12 significant digits; "nan", "inf", "-inf".
[[nodiscard]] std::string format_number(double v);

/// Trace of one run with exactly the requested columns, header first.
[[nodiscard]] std::string trace_csv(const ScenarioResult& result, const std::vector<std::string>& columns);
[[nodiscard]] std::string trace_csv(const ScenarioResult& result);

/// `key = value` lines.
[[nodiscard]] std::string summary_text(const RunSummary& summary);

/// One row per sweep variant with a status column.
[[nodiscard]] std::string sweep_table_csv(std::string_view axis, const std::vector<SweepEntry>& entries);

/// 800x500 line chart of a CSV: first column on x, every other numeric
/// column except "valid" as a polyline (NaN cells break the line).
[[nodiscard]] std::string svg_from_csv(std::string_view csv, std::string_view title);

/// Round outward to one significant digit: lower bound down, upper bound up.
[[nodiscard]] double round_down_1sig(double v);
[[nodiscard]] double round_up_1sig(double v);

}  // namespace esaccel
