#include "subnewton/trace.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "subnewton/error.hpp"

namespace subnewton {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw DataError("malformed number '" + std::string(text) + "'");
  return x;
}

std::string trace_header() {
  std::string out;
  for (std::size_t k = 0; k < kTraceColumns.size(); ++k) {
    if (k) out += ',';
    out += kTraceColumns[k];
  }
  return out;
}

std::string trace_row(const TraceRecord& rec) {
  std::ostringstream os;
  os << rec.t << ',' << to_string(rec.phase) << ',' << format_double(rec.lambda_tilde) << ','
     << format_double(rec.F) << ',' << format_double(rec.eta) << ',' << rec.inner_epochs << ','
     << (rec.certified ? 1 : 0) << ',' << rec.comp_grad_evals << ',' << rec.full_grad_evals << ','
     << format_double(rec.wall_ms);
  return os.str();
}

void write_trace_csv(std::ostream& out, std::span<const TraceRecord> trace) {
  out << trace_header() << '\n';
  for (const TraceRecord& rec : trace) out << trace_row(rec) << '\n';
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <class T>
T parse_unsigned(std::string_view text) {
  T x{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw DataError("malformed integer '" + std::string(text) + "'");
  return x;
}

Phase parse_phase(std::string_view text) {
  if (text == "I") return Phase::damped;
  if (text == "II") return Phase::unit;
  if (text == "-") return Phase::none;
  throw DataError("malformed phase '" + std::string(text) + "'");
}

}  // namespace

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != trace_header())
    throw DataError("trace header does not match the documented schema");
  std::vector<TraceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kTraceColumns.size()) throw DataError("trace row has the wrong column count");
    TraceRecord rec;
    rec.t = parse_unsigned<std::size_t>(f[0]);
    rec.phase = parse_phase(f[1]);
    rec.lambda_tilde = parse_double(f[2]);
    rec.F = parse_double(f[3]);
    rec.eta = parse_double(f[4]);
    rec.inner_epochs = parse_unsigned<std::size_t>(f[5]);
    rec.certified = parse_unsigned<int>(f[6]) != 0;
    rec.comp_grad_evals = parse_unsigned<std::uint64_t>(f[7]);
    rec.full_grad_evals = parse_unsigned<std::uint64_t>(f[8]);
    rec.wall_ms = parse_double(f[9]);
    out.push_back(rec);
  }
  return out;
}

nlohmann::json to_json(const WorkCounters& work) {
  return {{"component_grads", work.component_grads},
          {"hessian_rows", work.hessian_rows},
          {"full_grads", work.full_grads},
          {"row_evals", work.row_evals()}};
}

nlohmann::json to_json(const TraceRecord& rec) {
  auto num = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  return {{"t", rec.t},
          {"phase", to_string(rec.phase)},
          {"lambda_tilde", num(rec.lambda_tilde)},
          {"F", num(rec.F)},
          {"eta", num(rec.eta)},
          {"inner_epochs", rec.inner_epochs},
          {"certified", rec.certified},
          {"comp_grad_evals", rec.comp_grad_evals},
          {"full_grad_evals", rec.full_grad_evals},
          {"wall_ms", rec.wall_ms}};
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw DataError("cannot move output into place at '" + path + "': " + ec.message());
}

}  // namespace subnewton
