#pragma once
// Trace CSV and JSON summary I/O.
#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "subnewton/prox_newton.hpp"

namespace subnewton {

inline constexpr std::array<std::string_view, 10> kTraceColumns = {
    "t", "phase", "lambda_tilde", "F", "eta", "inner_epochs",
    "certified", "comp_grad_evals", "full_grad_evals", "wall_ms"};

// Shortest text that parses back to the same double ("nan", "inf" for specials).
std::string format_double(double x);
double parse_double(std::string_view text);

std::string trace_header();
std::string trace_row(const TraceRecord& rec);
void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace);
// Throws DataError unless the header is exactly kTraceColumns.
std::vector<TraceRecord> read_trace_csv(std::istream& in);

nlohmann::json to_json(const WorkCounters& work);
nlohmann::json to_json(const TraceRecord& rec);

// Writes to `path` through a temporary file and a rename, so readers never see
// a partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace subnewton
