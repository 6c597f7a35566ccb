#pragma once

#include <algorithm>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "doc2doc/utf8.hpp"

namespace doc2doc {

struct TokenizerConfig {
  bool lowercase = true;
  // Peel leading/trailing punctuation off each whitespace token, one
  // character per token. Word-internal punctuation ("don't", "3.5") stays.
  bool split_punctuation = true;
};

using Tokens = std::vector<std::string>;

inline bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  if (cp == 0xA1 || cp == 0xAB || cp == 0xBB || cp == 0xBF || cp == 0xB7) return true;
  if (cp >= 0x2010 && cp <= 0x2027) return true;  // dashes, quotes, ellipsis
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  if (cp >= 0x3001 && cp <= 0x3003) return true;  // 、。〃
  if (cp >= 0x3008 && cp <= 0x3011) return true;  // CJK brackets
  if (cp >= 0x3014 && cp <= 0x301F) return true;
  if (cp >= 0xFF01 && cp <= 0xFF0F) return true;  // fullwidth ASCII punctuation
  if (cp >= 0xFF1A && cp <= 0xFF20) return true;
  if (cp >= 0xFF3B && cp <= 0xFF40) return true;
  if (cp >= 0xFF5B && cp <= 0xFF65) return true;
  return false;
}

inline bool is_punctuation_token(std::string_view token) {
  std::size_t pos = 0;
  if (token.empty()) return false;
  while (pos < token.size()) {
    auto cp = utf8::decode(token, pos);
    if (!cp || !is_punctuation(*cp)) return false;
  }
  return true;
}

namespace detail {

inline void emit_word(std::string_view word, const TokenizerConfig& cfg, Tokens& out) {
  if (!cfg.split_punctuation) {
    out.emplace_back(cfg.lowercase ? utf8::lower(word) : std::string(word));
    return;
  }
  struct Cp {
    char32_t cp;
    std::size_t begin, end;
  };
  std::vector<Cp> cps;
  for (std::size_t pos = 0; pos < word.size();) {
    const std::size_t begin = pos;
    auto cp = utf8::decode(word, pos);
    if (!cp) {
      ++pos;
      cps.push_back({0xFFFD, begin, pos});
    } else {
      cps.push_back({*cp, begin, pos});
    }
  }
  std::size_t lead = 0;
  while (lead < cps.size() && is_punctuation(cps[lead].cp)) ++lead;
  std::size_t trail = cps.size();
  while (trail > lead && is_punctuation(cps[trail - 1].cp)) --trail;
  auto piece = [&](std::size_t a, std::size_t b) {
    std::string_view s = word.substr(cps[a].begin, cps[b - 1].end - cps[a].begin);
    out.emplace_back(cfg.lowercase ? utf8::lower(s) : std::string(s));
  };
  for (std::size_t i = 0; i < lead; ++i) piece(i, i + 1);
  if (trail > lead) piece(lead, trail);
  for (std::size_t i = std::max(trail, lead); i < cps.size(); ++i) piece(i, i + 1);
}

}  // namespace detail

/// Whitespace tokenization with optional punctuation splitting and
/// lowercasing. Concatenating the tokens reproduces the input minus
/// whitespace (modulo case).
inline Tokens tokenize(std::string_view text, const TokenizerConfig& cfg = {}) {
  Tokens out;
  std::size_t pos = 0;
  std::size_t word_start = std::string_view::npos;
  while (pos < text.size()) {
    const std::size_t at = pos;
    auto cp = utf8::decode(text, pos);
    if (!cp) ++pos;
    if (cp && utf8::is_space(*cp)) {
      if (word_start != std::string_view::npos) {
        detail::emit_word(text.substr(word_start, at - word_start), cfg, out);
        word_start = std::string_view::npos;
      }
    } else if (word_start == std::string_view::npos) {
      word_start = at;
    }
  }
  if (word_start != std::string_view::npos)
    detail::emit_word(text.substr(word_start), cfg, out);
  return out;
}

/// Tokenizes a sequence of sentences into one flat token list.
template <typename Range>
Tokens tokenize_all(const Range& sentences, const TokenizerConfig& cfg = {}) {
  Tokens out;
  for (const auto& s : sentences) {
    Tokens t = tokenize(s, cfg);
    out.insert(out.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return out;
}

/// Number of whitespace-delimited tokens; no allocation.
inline std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (std::size_t pos = 0; pos < text.size();) {
    auto cp = utf8::decode(text, pos);
    if (!cp) ++pos;
    const bool space = cp && utf8::is_space(*cp);
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

}  // namespace doc2doc
