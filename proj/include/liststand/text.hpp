#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace liststand::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);
bool starts_with(std::string_view s, std::string_view prefix);

/// Replaces every run of ASCII whitespace with one space and trims.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

bool is_valid_utf8(std::string_view s);
std::string latin1_to_utf8(std::string_view s);
/// UTF-8 if the bytes already are, latin-1 otherwise. Never fails.
std::string to_utf8(std::string_view bytes);

bool is_integer(std::string_view s);

/// One CSV record, RFC 4180 quoting.
std::vector<std::string> parse_csv_line(std::string_view line);
std::string csv_field(std::string_view field);

std::string hex_encode(std::string_view bytes);

}  // namespace liststand::text
