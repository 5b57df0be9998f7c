#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finmoji/unicode_tables.hpp"
#include "finmoji/utf8.hpp"

namespace finmoji {

namespace unicode {

template <std::size_t N>
constexpr bool in_table(const std::array<CodeRange, N>& table, char32_t cp) {
  auto it = std::upper_bound(table.begin(), table.end(), cp,
                             [](char32_t v, const CodeRange& r) { return v < r.lo; });
  if (it == table.begin()) return false;
  --it;
  return cp <= it->hi;
}

constexpr char32_t kZeroWidthJoiner = 0x200D;
constexpr char32_t kTextSelector = 0xFE0E;
constexpr char32_t kEmojiSelector = 0xFE0F;
constexpr char32_t kCombiningKeycap = 0x20E3;

constexpr bool is_extended_pictographic(char32_t cp) { return in_table(kExtendedPictographic, cp); }
constexpr bool is_white_space(char32_t cp) { return in_table(kWhiteSpace, cp); }
constexpr bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }
constexpr bool is_emoji_modifier(char32_t cp) { return cp >= 0x1F3FB && cp <= 0x1F3FF; }
constexpr bool is_tag(char32_t cp) { return cp >= 0xE0020 && cp <= 0xE007F; }
constexpr bool is_keycap_base(char32_t cp) {
  return (cp >= U'0' && cp <= U'9') || cp == U'#' || cp == U'*';
}

// Regex \w with Unicode semantics: Alphabetic, decimal digits, underscore.
constexpr bool is_word_char(char32_t cp) {
  return cp == U'_' || in_table(kAlphabetic, cp) || in_table(kDecimalNumber, cp);
}

}  // namespace unicode

enum class TokenKind { Word, Emoji, Symbol };

enum class TokenizerMode {
  PaperRegex,     // \w+|[^\s], one scalar per non-word token
  GraphemeEmoji,  // as above, but emoji clusters stay whole
};

struct Token {
  std::string text;
  TokenKind kind;
  std::size_t begin;  // byte offsets into the source text
  std::size_t end;
};

using TokenSequence = std::vector<Token>;

inline const char* to_string(TokenKind k) {
  switch (k) {
    case TokenKind::Word: return "word";
    case TokenKind::Emoji: return "emoji";
    case TokenKind::Symbol: return "symbol";
  }
  return "?";
}

inline const char* to_string(TokenizerMode m) {
  return m == TokenizerMode::PaperRegex ? "paper-regex" : "grapheme-emoji";
}

// True iff the cluster's base scalar is Extended_Pictographic, a Regional
// Indicator, or a skin-tone modifier, or the cluster is a keycap sequence.
// Presentation selectors do not matter.
inline bool is_emoji(std::string_view cluster) {
  if (!utf8::is_valid(cluster)) return false;
  const auto cps = utf8::code_points(cluster);
  if (cps.empty()) return false;
  const char32_t base = cps.front();
  if (unicode::is_extended_pictographic(base) || unicode::is_regional_indicator(base) ||
      unicode::is_emoji_modifier(base)) {
    return true;
  }
  if (unicode::is_keycap_base(base) && cps.size() >= 2) {
    if (cps[1] == unicode::kCombiningKeycap) return true;
    return cps.size() >= 3 && cps[1] == unicode::kEmojiSelector && cps[2] == unicode::kCombiningKeycap;
  }
  return false;
}

namespace detail {

inline std::size_t consume_emoji_extend(std::span<const utf8::Scalar> sc, std::size_t j) {
  while (j < sc.size()) {
    const char32_t cp = sc[j].value;
    if (cp == unicode::kEmojiSelector || cp == unicode::kTextSelector || cp == unicode::kCombiningKeycap ||
        unicode::is_emoji_modifier(cp) || unicode::is_tag(cp)) {
      ++j;
    } else {
      break;
    }
  }
  return j;
}

// Returns the end index of an emoji cluster starting at i, or i if none.
inline std::size_t match_emoji_cluster(std::span<const utf8::Scalar> sc, std::size_t i) {
  const std::size_t n = sc.size();
  const char32_t cp = sc[i].value;

  if (unicode::is_keycap_base(cp)) {
    std::size_t j = i + 1;
    if (j < n && sc[j].value == unicode::kEmojiSelector) ++j;
    return (j < n && sc[j].value == unicode::kCombiningKeycap) ? j + 1 : i;
  }
  if (unicode::is_regional_indicator(cp)) {
    return (i + 1 < n && unicode::is_regional_indicator(sc[i + 1].value)) ? i + 2 : i + 1;
  }
  if (!unicode::is_extended_pictographic(cp) && !unicode::is_emoji_modifier(cp)) return i;

  std::size_t j = consume_emoji_extend(sc, i + 1);
  while (j < n && sc[j].value == unicode::kZeroWidthJoiner) {
    if (j + 1 < n && unicode::is_extended_pictographic(sc[j + 1].value)) {
      j = consume_emoji_extend(sc, j + 2);
    } else {
      ++j;  // a dangling joiner still belongs to the cluster
      break;
    }
  }
  // Alphabetic pictographs (e.g. circled letters) without any emoji
  // continuation stay word characters.
  if (unicode::is_word_char(cp) && j == i + 1) return i;
  return j;
}

inline Token make_token(std::string_view text, std::span<const utf8::Scalar> sc, std::size_t from,
                        std::size_t to, TokenKind kind) {
  const std::size_t b = sc[from].offset;
  const std::size_t e = sc[to - 1].offset + sc[to - 1].length;
  return Token{std::string(text.substr(b, e - b)), kind, b, e};
}

}  // namespace detail

// Throws std::invalid_argument if `text` is not valid UTF-8.
inline TokenSequence tokenize(std::string_view text, TokenizerMode mode = TokenizerMode::PaperRegex) {
  const auto scalars = utf8::decode(text);
  const std::span<const utf8::Scalar> sc(scalars);
  const bool graphemes = mode == TokenizerMode::GraphemeEmoji;
  TokenSequence out;

  std::size_t i = 0;
  while (i < sc.size()) {
    const char32_t cp = sc[i].value;
    if (unicode::is_white_space(cp)) {
      ++i;
      continue;
    }
    if (graphemes) {
      const std::size_t end = detail::match_emoji_cluster(sc, i);
      if (end > i) {
        out.push_back(detail::make_token(text, sc, i, end, TokenKind::Emoji));
        i = end;
        continue;
      }
    }
    if (unicode::is_word_char(cp)) {
      std::size_t j = i + 1;
      while (j < sc.size() && unicode::is_word_char(sc[j].value) &&
             !(graphemes && detail::match_emoji_cluster(sc, j) > j)) {
        ++j;
      }
      out.push_back(detail::make_token(text, sc, i, j, TokenKind::Word));
      i = j;
      continue;
    }
    Token t = detail::make_token(text, sc, i, i + 1, TokenKind::Symbol);
    if (is_emoji(t.text)) t.kind = TokenKind::Emoji;
    out.push_back(std::move(t));
    ++i;
  }
  return out;
}

inline std::vector<std::string> extract_emojis(std::string_view text,
                                               TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text, mode)) {
    if (t.kind == TokenKind::Emoji) out.push_back(std::move(t.text));
  }
  return out;
}

// Collapses every run of Unicode white space to one ASCII space and trims.
inline std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const auto& sc : utf8::decode(text)) {
    if (unicode::is_white_space(sc.value)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(text.substr(sc.offset, sc.length));
  }
  return out;
}

// Removes emoji tokens. Each removed token leaves a space behind so the
// neighbouring tokens are not fused, then white space is collapsed.
inline std::string strip_emojis(std::string_view text, TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::string kept;
  kept.reserve(text.size());
  std::size_t last = 0;
  for (const auto& t : tokenize(text, mode)) {
    if (t.kind != TokenKind::Emoji) continue;
    kept.append(text.substr(last, t.begin - last));
    kept.push_back(' ');
    last = t.end;
  }
  kept.append(text.substr(last));
  return normalize_whitespace(kept);
}

}  // namespace finmoji
