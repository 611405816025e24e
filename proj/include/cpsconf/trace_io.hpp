#pragma once

#include "cpsconf/tss.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace cpsconf {

/// Reads a trace from CSV with header `t,j,mode,y1,...,yn`. The `j` and
/// `mode` columns are optional (j defaults to 1, mode to absent); rows must
/// already be sorted by (t, j).
TimedStateSequence read_trace_csv(std::istream& in, const std::string& origin = "<csv>");
TimedStateSequence read_trace_csv_file(const std::filesystem::path& path);

void write_trace_csv(std::ostream& out, const TimedStateSequence& tss);
void write_trace_csv_file(const std::filesystem::path& path,
                          const TimedStateSequence& tss);

} // namespace cpsconf
