#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pdgp/errors.hpp"

namespace pdgp {

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_csv_line(std::string_view line, char delim = ',') {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == delim) {
      out.emplace_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

// Locale-independent numeric cell parser ('.' decimal separator only).
inline double parse_double_strict(std::string_view cell, const std::string& where) {
  const std::string t = trim(cell);
  if (t.empty()) fail(errc::malformed_row, "empty numeric cell at " + where);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    fail(errc::malformed_row, "cannot parse number '" + t + "' at " + where);
  return v;
}

inline long parse_long_strict(std::string_view cell, const std::string& where) {
  const std::string t = trim(cell);
  long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size())
    fail(errc::malformed_row, "cannot parse integer '" + t + "' at " + where);
  return v;
}

// Shortest representation that round-trips a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::missing_file, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::missing_file, "cannot open for writing: " + path.string());
  out << content;
  if (!out) fail(errc::missing_file, "write failed: " + path.string());
}

// --- base64 (used for binary matrix payloads inside JSON model files) ---

namespace detail {
constexpr char b64_alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}
}  // namespace detail

inline std::string base64_encode(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (size_t i = 0; i < len; i += 3) {
    uint32_t v = uint32_t(p[i]) << 16;
    if (i + 1 < len) v |= uint32_t(p[i + 1]) << 8;
    if (i + 2 < len) v |= uint32_t(p[i + 2]);
    out.push_back(detail::b64_alphabet[(v >> 18) & 63]);
    out.push_back(detail::b64_alphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < len ? detail::b64_alphabet[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < len ? detail::b64_alphabet[v & 63] : '=');
  }
  return out;
}

inline std::vector<unsigned char> base64_decode(std::string_view s) {
  std::vector<unsigned char> out;
  out.reserve(s.size() / 4 * 3);
  uint32_t acc = 0;
  int bits = 0;
  for (char c : s) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = detail::b64_value(c);
    if (v < 0) fail(errc::malformed_row, "invalid base64 character");
    acc = (acc << 6) | uint32_t(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

inline std::string encode_doubles(const std::vector<double>& v) {
  return base64_encode(v.data(), v.size() * sizeof(double));
}

inline std::vector<double> decode_doubles(std::string_view s, size_t expected_count) {
  const auto bytes = base64_decode(s);
  if (bytes.size() != expected_count * sizeof(double))
    fail(errc::malformed_row, "decoded payload size mismatch");
  std::vector<double> out(expected_count);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace pdgp
