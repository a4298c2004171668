#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pilecast {

// Shortest round-trip decimal printing of doubles. Every file format in the
// project goes through these two functions so that save/load round-trips are
// bit-exact.
std::string format_double(double v);
double parse_double(std::string_view s);

void append_double(std::string& out, double v);

std::uint64_t parse_u64(std::string_view s);
long parse_long(std::string_view s);

// Whitespace-separated tokens of a line.
std::vector<std::string_view> split_tokens(std::string_view line);

// Reads the next line, skipping '#' comment lines; returns false on EOF.
bool next_data_line(std::istream& in, std::string& line);

}  // namespace pilecast
