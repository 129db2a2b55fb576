#pragma once

#include <iosfwd>
#include <optional>

#include "pmctg/search.hpp"

namespace pmctg {

// Newline-delimited JSON: one "header" record (config, seed, initial
// sentence), one "step" record per step, one "result" record.
// `line` tags every record when several traces share a file.
void write_trace(std::ostream& out, const SearchTrace& trace, const Vocabulary& vocab,
                 std::optional<std::size_t> line = std::nullopt);

// Human-readable rendering of a trace file; returns the number of records.
std::size_t print_trace(std::istream& in, std::ostream& out);

}  // namespace pmctg
