#include "cpsconf/trace_io.hpp"

#include "cpsconf/robustness.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cpsconf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& s, const std::string& origin, std::size_t row) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error(origin + ": row " + std::to_string(row) +
                             ": malformed number '" + s + "'");
  return v;
}

} // namespace

TimedStateSequence read_trace_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty trace file");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw std::runtime_error(origin + ": header must start with column 't'");

  std::size_t col = 1;
  bool has_j = col < header.size() && header[col] == "j";
  if (has_j) ++col;
  bool has_mode = col < header.size() && header[col] == "mode";
  if (has_mode) ++col;
  const std::size_t dim = header.size() - col;
  if (dim == 0) throw std::runtime_error(origin + ": no output columns y1..yn");

  std::vector<double> values;
  std::vector<HybridTimestamp> stamps;
  std::vector<int> modes;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(origin + ": row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    std::size_t f = 0;
    HybridTimestamp ts;
    ts.t = parse_number(fields[f++], origin, row);
    ts.j = has_j ? static_cast<int>(parse_number(fields[f++], origin, row)) : 1;
    if (has_mode) modes.push_back(static_cast<int>(parse_number(fields[f++], origin, row)));
    for (std::size_t d = 0; d < dim; ++d)
      values.push_back(parse_number(fields[f++], origin, row));
    stamps.push_back(ts);
  }
  if (stamps.empty()) throw std::runtime_error(origin + ": trace has no samples");

  try {
    return TimedStateSequence(std::move(values), std::move(stamps), dim,
                              has_mode ? std::optional(std::move(modes)) : std::nullopt);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
}

TimedStateSequence read_trace_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  return read_trace_csv(in, path.string());
}

void write_trace_csv(std::ostream& out, const TimedStateSequence& tss) {
  out << "t,j";
  if (tss.has_modes()) out << ",mode";
  for (std::size_t d = 1; d <= tss.dim(); ++d) out << ",y" << d;
  out << "\n";
  for (std::size_t i = 0; i < tss.size(); ++i) {
    out << format_double(tss.time(i)) << ',' << tss.jumps(i);
    if (tss.has_modes()) out << ',' << tss.mode(i);
    auto s = tss.sample(i);
    for (double v : s) out << ',' << format_double(v);
    out << "\n";
  }
}

void write_trace_csv_file(const std::filesystem::path& path,
                          const TimedStateSequence& tss) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  write_trace_csv(out, tss);
}

} // namespace cpsconf
