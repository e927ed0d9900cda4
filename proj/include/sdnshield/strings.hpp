#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sdnshield {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);

// Strict numeric parsing; the whole token must be consumed. Throws UserError
// with `context` in the message on failure.
double parse_double(std::string_view token, const std::string& context);
std::int64_t parse_int(std::string_view token, const std::string& context);
std::uint16_t parse_port(std::string_view token, const std::string& context);

// Dotted-quad IPv4 to host-order integer; returns false on malformed input.
bool ipv4_to_u32(std::string_view ip, std::uint32_t& out);

// Shortest form with up to 15 significant digits; round-trips every value
// this project produces and keeps integers free of a trailing ".0".
std::string format_double(double v);

}  // namespace sdnshield
