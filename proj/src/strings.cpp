#include "sdnshield/strings.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "sdnshield/errors.hpp"

namespace sdnshield {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double parse_double(std::string_view token, const std::string& context) {
  const std::string t = trim(token);
  if (t.empty()) throw UserError(context + ": empty number");
  char* end = nullptr;
  // strtod instead of from_chars: gcc 11's float from_chars rejects some
  // exponent spellings produced by other tools.
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw UserError(context + ": not a number: '" + t + "'");
  return v;
}

std::int64_t parse_int(std::string_view token, const std::string& context) {
  const std::string t = trim(token);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    throw UserError(context + ": not an integer: '" + t + "'");
  return v;
}

std::uint16_t parse_port(std::string_view token, const std::string& context) {
  const std::int64_t v = parse_int(token, context);
  if (v < 0 || v > 65535)
    throw UserError(context + ": port out of range: " + std::to_string(v));
  return static_cast<std::uint16_t>(v);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

bool ipv4_to_u32(std::string_view ip, std::uint32_t& out) {
  std::uint32_t acc = 0;
  int octets = 0;
  std::size_t i = 0;
  while (i <= ip.size()) {
    std::size_t j = i;
    std::uint32_t val = 0;
    while (j < ip.size() && ip[j] >= '0' && ip[j] <= '9') {
      val = val * 10 + static_cast<std::uint32_t>(ip[j] - '0');
      if (val > 255) return false;
      ++j;
    }
    if (j == i) return false;
    acc = (acc << 8) | val;
    ++octets;
    if (j == ip.size()) break;
    if (ip[j] != '.') return false;
    i = j + 1;
  }
  if (octets != 4) return false;
  out = acc;
  return true;
}

}  // namespace sdnshield
