#include "unigrad/harness.hpp"

#include "number_format.hpp"

#include <fstream>
#include <sstream>
#include <string_view>

namespace unigrad {

namespace {

void write_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << detail::shortest(*v);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double required(std::string_view field, std::size_t row, const char* column) {
  const auto v = detail::parse_double(field);
  if (!v)
    throw ParseError(ParseError::Kind::NonNumeric, row,
                     "trace row " + std::to_string(row) + ": bad " + column + " '" +
                         std::string(field) + "'");
  return *v;
}

std::optional<double> optional_field(std::string_view field, std::size_t row,
                                     const char* column) {
  if (detail::trim(field).empty()) return std::nullopt;
  return required(field, row, column);
}

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  for (const auto& [key, value] : trace.metadata) out << "# " << key << '=' << value << '\n';
  out << kTraceColumns << '\n';
  for (const TraceRow& r : trace.rows) {
    out << r.t << ',' << r.i_t << ',' << detail::shortest(r.L_next) << ','
        << detail::shortest(r.f_gt_xt) << ',' << detail::shortest(r.f_gt_xnext) << ',';
    write_optional(out, r.f_gt_yt);
    out << ',';
    write_optional(out, r.f_full);
    out << ',' << detail::shortest(r.elapsed_s) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseError::Kind::Io, 0, "cannot write " + path.string());
  write_trace_csv(out, trace);
}

RunTrace read_trace_csv(std::istream& in) {
  RunTrace trace;
  std::string line;
  bool header_seen = false;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      std::string_view meta = detail::trim(body.substr(1));
      const auto eq = meta.find('=');
      if (eq != std::string_view::npos)
        trace.set(std::string(meta.substr(0, eq)), std::string(meta.substr(eq + 1)));
      continue;
    }
    if (!header_seen) {
      if (body != kTraceColumns)
        throw ParseError(ParseError::Kind::Ragged, 0,
                         "trace header must be '" + std::string(kTraceColumns) + "'");
      header_seen = true;
      continue;
    }
    ++row_no;
    const auto f = split(body);
    if (f.size() != 8)
      throw ParseError(ParseError::Kind::Ragged, row_no,
                       "trace row " + std::to_string(row_no) + ": expected 8 fields, got " +
                           std::to_string(f.size()));
    TraceRow r;
    r.t = static_cast<std::int64_t>(required(f[0], row_no, "t"));
    r.i_t = static_cast<int>(required(f[1], row_no, "i_t"));
    r.L_next = required(f[2], row_no, "L_next");
    r.f_gt_xt = required(f[3], row_no, "f_gt_xt");
    r.f_gt_xnext = required(f[4], row_no, "f_gt_xnext");
    r.f_gt_yt = optional_field(f[5], row_no, "f_gt_yt");
    r.f_full = optional_field(f[6], row_no, "f_full");
    r.elapsed_s = required(f[7], row_no, "elapsed_s");
    trace.rows.push_back(r);
  }
  if (!header_seen) throw ParseError(ParseError::Kind::Empty, 0, "trace has no header");
  return trace;
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::Io, 0, "cannot open " + path.string());
  return read_trace_csv(in);
}

void write_bound_curve(const std::filesystem::path& path,
                       const std::vector<BoundCurveRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseError::Kind::Io, 0, "cannot write " + path.string());
  out << "k,gap,bound\n";
  for (const auto& r : rows) {
    out << r.k << ',' << detail::shortest(r.gap) << ',';
    write_optional(out, r.bound);
    out << '\n';
  }
}

}  // namespace unigrad
