#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finmoji::utf8 {

struct Scalar {
  char32_t value;
  std::size_t offset;  // byte offset of the first code unit
  std::size_t length;  // encoded length in bytes
};

// Decodes one scalar starting at `pos`. Rejects overlong forms, surrogates,
// and values above U+10FFFF.
inline std::optional<Scalar> decode_at(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return std::nullopt;
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return Scalar{b0, pos, 1};

  std::size_t len;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return std::nullopt;
  }
  if (pos + len > s.size()) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
  return Scalar{cp, pos, len};
}

inline bool is_valid(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto sc = decode_at(s, pos);
    if (!sc) return false;
    pos += sc->length;
  }
  return true;
}

// Decodes a whole string; throws std::invalid_argument on malformed input.
inline std::vector<Scalar> decode(std::string_view s) {
  std::vector<Scalar> out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto sc = decode_at(s, pos);
    if (!sc) throw std::invalid_argument("invalid UTF-8 at byte " + std::to_string(pos));
    out.push_back(*sc);
    pos += sc->length;
  }
  return out;
}

inline std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  for (const auto& sc : decode(s)) out.push_back(sc.value);
  return out;
}

inline std::size_t length(std::string_view s) { return decode(s).size(); }

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  for (char32_t cp : cps) append(out, cp);
  return out;
}

}  // namespace finmoji::utf8
