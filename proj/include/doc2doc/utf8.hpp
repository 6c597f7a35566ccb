#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace doc2doc::utf8 {

/// Decodes one code point starting at `pos`, advancing `pos` past it.
/// Returns nullopt on an ill-formed sequence (overlong, surrogate,
/// truncated, > U+10FFFF); `pos` is left unchanged in that case.
inline std::optional<char32_t> decode(std::string_view s, std::size_t& pos) {
  if (pos >= s.size()) return std::nullopt;
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return std::nullopt;
  }
  if (pos + len > s.size()) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
    return std::nullopt;
  pos += len;
  return cp;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

inline std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

/// Byte offset of the first ill-formed sequence, or nullopt if `s` is valid.
inline std::optional<std::size_t> first_invalid(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t at = pos;
    if (!decode(s, pos)) return at;
  }
  return std::nullopt;
}

inline bool valid(std::string_view s) { return !first_invalid(s).has_value(); }

inline bool is_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\v': case U'\f':
    case 0x00A0: case 0x3000: case 0x2009: case 0x200A: case 0x202F:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x2008;
  }
}

/// Simple case folding for ASCII, Latin-1, Greek and Cyrillic capitals.
/// Other scripts pass through unchanged.
inline char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

/// Lowercases a valid UTF-8 string; ill-formed bytes are copied through.
inline std::string lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    if (auto cp = decode(s, pos)) {
      append(out, to_lower(*cp));
    } else {
      out += s[pos++];
    }
  }
  return out;
}

/// Trims Unicode whitespace from both ends.
inline std::string_view trim(std::string_view s) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t next = begin;
    auto cp = decode(s, next);
    if (!cp || !is_space(*cp)) break;
    begin = next;
  }
  std::size_t end = begin;
  std::size_t pos = begin;
  while (pos < s.size()) {
    auto cp = decode(s, pos);
    if (!cp) {
      ++pos;
      end = pos;
      continue;
    }
    if (!is_space(*cp)) end = pos;
  }
  return s.substr(begin, end - begin);
}

/// Last code point of a valid UTF-8 string.
inline std::optional<char32_t> last(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t start = s.size() - 1;
  while (start > 0 && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) --start;
  std::size_t pos = start;
  return decode(s, pos);
}

}  // namespace doc2doc::utf8
