// JSON-lines trace files: one header line, one line per step, then the
// operation records, node lifecycle records, and an end marker. Stable field
// names; ids as strings; timestamps as [num, w_id].
#pragma once

#include <iosfwd>
#include <string>

#include "abcc/simnet.hpp"

namespace abcc {

std::string trace_to_jsonl(const Trace& trace);
void write_trace(const Trace& trace, const std::string& path);

Trace trace_from_jsonl(const std::string& text);
Trace read_trace(const std::string& path);

}  // namespace abcc
