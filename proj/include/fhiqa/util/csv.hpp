#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fhiqa::util {

// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a field only when it contains a delimiter, quote or whitespace edge.
std::string csv_escape(std::string_view field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest representation that parses back to the same double.
std::string format_roundtrip(double value);

// Fixed-point with `decimals` digits.
std::string format_fixed(double value, int decimals);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

// FNV-1a, stable across platforms; used to derive per-image random streams.
std::uint64_t stable_hash(std::string_view text);

// Mixes several 64-bit values into one seed (splitmix64 finaliser).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace fhiqa::util
