#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "finmoji/corpus.hpp"
#include "finmoji/error.hpp"
#include "finmoji/tokenizer.hpp"
#include "finmoji/utf8.hpp"

namespace finmoji {

// Scores are fractions of the labeled posts containing the emoji. The raw
// counts are kept so the ratios can be checked exactly.
struct EmojiStats {
  std::string emoji;
  std::uint64_t n_posts = 0;
  std::uint64_t n_bullish = 0;
  std::uint64_t n_bearish = 0;
  double bullish_score = 0.0;
  double bearish_score = 0.0;
};

// Unordered pair of distinct emojis, stored with first < second in code
// point order.
struct PairStats {
  std::string first;
  std::string second;
  std::uint64_t n_posts = 0;
  std::uint64_t n_bullish = 0;
  std::uint64_t n_bearish = 0;
  double bullish_score = 0.0;
  double bearish_score = 0.0;
};

struct EmojiLexicon {
  std::vector<EmojiStats> singles;
  std::vector<PairStats> pairs;
  std::size_t top_k = 50;
  std::size_t source_size = 0;
};

// Posts grouped by number of distinct emojis: 1..9 and 10+.
struct CountBucket {
  std::string unique_count;  // "1".."9", "10+"
  std::uint64_t n_posts = 0;
  std::uint64_t n_bullish = 0;
  std::uint64_t n_bearish = 0;
  double bullish_fraction = 0.0;
  double bearish_fraction = 0.0;
};

namespace detail {

// Distinct emojis of a post in code point order (UTF-8 byte order is code
// point order).
inline std::vector<std::string> distinct_emojis(std::string_view body, TokenizerMode mode) {
  auto e = extract_emojis(body, mode);
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return e;
}

struct Tally {
  std::uint64_t bullish = 0;
  std::uint64_t bearish = 0;
  std::uint64_t total() const { return bullish + bearish; }
};

template <typename Key, typename Make>
auto top_by_support(const std::map<Key, Tally>& tallies, std::size_t top_k, Make make) {
  using Out = decltype(make(tallies.begin()->first, tallies.begin()->second));
  std::vector<Out> out;
  for (const auto& [key, t] : tallies) out.push_back(make(key, t));
  // std::map iterates keys in code point order, so a stable sort on support
  // leaves ties in ascending code point order.
  std::stable_sort(out.begin(), out.end(), [](const Out& a, const Out& b) { return a.n_posts > b.n_posts; });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

template <typename Stats>
void fill_scores(Stats& s, const Tally& t) {
  s.n_posts = t.total();
  s.n_bullish = t.bullish;
  s.n_bearish = t.bearish;
  s.bullish_score = static_cast<double>(t.bullish) / static_cast<double>(s.n_posts);
  s.bearish_score = static_cast<double>(t.bearish) / static_cast<double>(s.n_posts);
}

}  // namespace detail

// Presence-based per-emoji scores over the labeled posts; unlabeled posts
// are ignored. Sorted by support, ties by code point.
inline std::vector<EmojiStats> single_scores(const Corpus& c, std::size_t top_k = 50,
                                             TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::map<std::string, detail::Tally> tallies;
  for (const auto& p : c) {
    if (!p.label) continue;
    for (auto& e : detail::distinct_emojis(p.body, mode)) {
      auto& t = tallies[std::move(e)];
      (*p.label == SentimentLabel::Bullish ? t.bullish : t.bearish) += 1;
    }
  }
  if (tallies.empty()) throw DataError("single_scores: no labeled emoji posts");
  return detail::top_by_support(tallies, top_k, [](const std::string& e, const detail::Tally& t) {
    EmojiStats s;
    s.emoji = e;
    detail::fill_scores(s, t);
    return s;
  });
}

// Each unordered pair of distinct emojis counts once per post regardless of
// repetitions or order.
inline std::vector<PairStats> pair_scores(const Corpus& c, std::size_t top_k = 50,
                                          TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::map<std::pair<std::string, std::string>, detail::Tally> tallies;
  bool any_labeled = false;
  for (const auto& p : c) {
    if (!p.label) continue;
    const auto e = detail::distinct_emojis(p.body, mode);
    any_labeled = any_labeled || !e.empty();
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (std::size_t j = i + 1; j < e.size(); ++j) {
        auto& t = tallies[{e[i], e[j]}];
        (*p.label == SentimentLabel::Bullish ? t.bullish : t.bearish) += 1;
      }
    }
  }
  if (!any_labeled) throw DataError("pair_scores: no labeled emoji posts");
  if (tallies.empty()) return {};
  return detail::top_by_support(tallies, top_k, [](const auto& key, const detail::Tally& t) {
    PairStats s;
    s.first = key.first;
    s.second = key.second;
    detail::fill_scores(s, t);
    return s;
  });
}

// Empty buckets report zero for both fractions.
inline std::vector<CountBucket> count_buckets(const Corpus& c, TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::vector<CountBucket> buckets(10);
  for (std::size_t i = 0; i < 9; ++i) buckets[i].unique_count = std::to_string(i + 1);
  buckets[9].unique_count = "10+";
  for (const auto& p : c) {
    if (!p.label) continue;
    const auto n = detail::distinct_emojis(p.body, mode).size();
    if (n == 0) continue;
    auto& b = buckets[std::min<std::size_t>(n, 10) - 1];
    ++b.n_posts;
    (*p.label == SentimentLabel::Bullish ? b.n_bullish : b.n_bearish) += 1;
  }
  for (auto& b : buckets) {
    if (b.n_posts == 0) continue;
    b.bullish_fraction = static_cast<double>(b.n_bullish) / static_cast<double>(b.n_posts);
    b.bearish_fraction = static_cast<double>(b.n_bearish) / static_cast<double>(b.n_posts);
  }
  return buckets;
}

inline EmojiLexicon build_lexicon(const Corpus& c, std::size_t top_k = 50, bool with_pairs = true,
                                  TokenizerMode mode = TokenizerMode::PaperRegex) {
  EmojiLexicon lex;
  lex.top_k = top_k;
  lex.singles = single_scores(c, top_k, mode);
  if (with_pairs) lex.pairs = pair_scores(c, top_k, mode);
  lex.source_size = c.size();
  return lex;
}

enum class LexiconPolicy {
  MeanOfSingles,  // mean bullish score over the post's distinct lexicon emojis
  PairAware,      // scored pairs present in the post take precedence
};

enum class LexiconVerdict { Bullish, Bearish, Abstain };

inline const char* to_string(LexiconVerdict v) {
  switch (v) {
    case LexiconVerdict::Bullish: return "bullish";
    case LexiconVerdict::Bearish: return "bearish";
    case LexiconVerdict::Abstain: return "abstain";
  }
  return "?";
}

// Mean score >= 0.5 is Bullish. Scores are summed in code point order so the
// result does not depend on emoji order within the post.
inline LexiconVerdict classify_with_lexicon(std::string_view body, const EmojiLexicon& lex,
                                            LexiconPolicy policy = LexiconPolicy::MeanOfSingles,
                                            TokenizerMode mode = TokenizerMode::PaperRegex) {
  const auto emojis = detail::distinct_emojis(body, mode);
  double sum = 0.0;
  std::size_t hits = 0;

  if (policy == LexiconPolicy::PairAware) {
    for (std::size_t i = 0; i < emojis.size(); ++i) {
      for (std::size_t j = i + 1; j < emojis.size(); ++j) {
        auto it = std::find_if(lex.pairs.begin(), lex.pairs.end(), [&](const PairStats& p) {
          return p.first == emojis[i] && p.second == emojis[j];
        });
        if (it != lex.pairs.end()) sum += it->bullish_score, ++hits;
      }
    }
  }
  if (hits == 0) {
    for (const auto& e : emojis) {
      auto it = std::find_if(lex.singles.begin(), lex.singles.end(), [&](const EmojiStats& s) { return s.emoji == e; });
      if (it != lex.singles.end()) sum += it->bullish_score, ++hits;
    }
  }
  if (hits == 0) return LexiconVerdict::Abstain;
  return sum / static_cast<double>(hits) >= 0.5 ? LexiconVerdict::Bullish : LexiconVerdict::Bearish;
}

inline LexiconVerdict classify_with_lexicon(const Post& p, const EmojiLexicon& lex,
                                            LexiconPolicy policy = LexiconPolicy::MeanOfSingles,
                                            TokenizerMode mode = TokenizerMode::PaperRegex) {
  return classify_with_lexicon(p.body, lex, policy, mode);
}

// ---------------------------------------------------------------------------
// Emoji time series

// Keyed by UTC calendar day "YYYY-MM-DD".
using DailySeries = std::map<std::string, double>;

// Daily share of posts containing `emoji`; days without posts are absent.
inline DailySeries emoji_index(const Corpus& c, std::string_view emoji,
                               TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> days;  // (hits, posts)
  for (const auto& p : c) {
    if (!p.created_at) continue;
    auto& d = days[utc_date(*p.created_at)];
    ++d.second;
    const auto e = extract_emojis(p.body, mode);
    if (std::find(e.begin(), e.end(), emoji) != e.end()) ++d.first;
  }
  if (days.empty()) throw DataError("emoji_index: no timestamped posts");
  DailySeries out;
  for (const auto& [day, counts] : days) {
    out[day] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return out;
}

// Sample Pearson correlation over the keys present in both series.
inline double pearson_corr(const DailySeries& a, const DailySeries& b) {
  std::vector<double> xs, ys;
  for (const auto& [k, v] : a) {
    if (auto it = b.find(k); it != b.end()) {
      xs.push_back(v);
      ys.push_back(it->second);
    }
  }
  if (xs.size() < 2) throw NumericError("pearson_corr: fewer than two aligned points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n, my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy, sxx += dx * dx, syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw NumericError("pearson_corr: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Consecutive differences over the keys shared by both series, returned as
// a pair of aligned change series keyed by the later day.
inline std::pair<DailySeries, DailySeries> aligned_changes(const DailySeries& a, const DailySeries& b) {
  std::vector<std::tuple<std::string, double, double>> aligned;
  for (const auto& [k, v] : a) {
    if (auto it = b.find(k); it != b.end()) aligned.emplace_back(k, v, it->second);
  }
  std::pair<DailySeries, DailySeries> out;
  for (std::size_t i = 1; i < aligned.size(); ++i) {
    const auto& [key, va, vb] = aligned[i];
    out.first[key] = va - std::get<1>(aligned[i - 1]);
    out.second[key] = vb - std::get<2>(aligned[i - 1]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json code_point_list(std::string_view s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (char32_t cp : utf8::code_points(s)) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
    j.push_back(buf);
  }
  return j;
}

inline nlohmann::ordered_json to_json(const EmojiStats& s) {
  return {{"emoji", s.emoji},           {"code_points", code_point_list(s.emoji)},
          {"n_posts", s.n_posts},       {"n_bullish", s.n_bullish},
          {"n_bearish", s.n_bearish},   {"bullish_score", s.bullish_score},
          {"bearish_score", s.bearish_score}};
}

inline nlohmann::ordered_json to_json(const PairStats& s) {
  return {{"pair", {s.first, s.second}},
          {"code_points", {code_point_list(s.first), code_point_list(s.second)}},
          {"n_posts", s.n_posts},
          {"n_bullish", s.n_bullish},
          {"n_bearish", s.n_bearish},
          {"bullish_score", s.bullish_score},
          {"bearish_score", s.bearish_score}};
}

inline nlohmann::ordered_json to_json(const CountBucket& b) {
  return {{"unique_count", b.unique_count},   {"n_posts", b.n_posts},
          {"n_bullish", b.n_bullish},         {"n_bearish", b.n_bearish},
          {"bullish_fraction", b.bullish_fraction}, {"bearish_fraction", b.bearish_fraction}};
}

inline constexpr int kLexiconFormatVersion = 1;

inline nlohmann::ordered_json to_json(const EmojiLexicon& lex) {
  nlohmann::ordered_json j;
  j["version"] = kLexiconFormatVersion;
  j["top_k"] = lex.top_k;
  j["source_size"] = lex.source_size;
  j["singles"] = nlohmann::ordered_json::array();
  for (const auto& s : lex.singles) j["singles"].push_back(to_json(s));
  j["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : lex.pairs) j["pairs"].push_back(to_json(p));
  return j;
}

namespace detail {

// Emoji text rebuilt from its code point list, cross-checked against the
// literal when both are present.
template <typename Json>
std::string emoji_from_json(const Json& literal, const Json& cps) {
  std::vector<char32_t> points;
  for (const auto& c : cps) {
    const auto s = c.template get<std::string>();
    if (s.size() < 3 || s.compare(0, 2, "U+") != 0) throw DataError("lexicon: bad code point " + s);
    points.push_back(static_cast<char32_t>(std::stoul(s.substr(2), nullptr, 16)));
  }
  auto text = utf8::encode(points);
  if (literal.is_string() && literal.template get<std::string>() != text) {
    throw DataError("lexicon: emoji literal disagrees with its code points");
  }
  return text;
}

}  // namespace detail

template <typename Json>
EmojiLexicon lexicon_from_json(const Json& j) {
  if (j.value("version", 0) != kLexiconFormatVersion) throw DataError("lexicon: unsupported version");
  EmojiLexicon lex;
  try {
    lex.top_k = j.at("top_k").template get<std::size_t>();
    lex.source_size = j.at("source_size").template get<std::size_t>();
    auto read_counts = [](auto& s, const Json& e) {
      s.n_posts = e.at("n_posts").template get<std::uint64_t>();
      s.n_bullish = e.at("n_bullish").template get<std::uint64_t>();
      s.n_bearish = e.at("n_bearish").template get<std::uint64_t>();
      s.bullish_score = e.at("bullish_score").template get<double>();
      s.bearish_score = e.at("bearish_score").template get<double>();
    };
    for (const auto& e : j.at("singles")) {
      EmojiStats s;
      s.emoji = detail::emoji_from_json(e.at("emoji"), e.at("code_points"));
      read_counts(s, e);
      lex.singles.push_back(std::move(s));
    }
    for (const auto& e : j.at("pairs")) {
      PairStats s;
      s.first = detail::emoji_from_json(e.at("pair").at(0), e.at("code_points").at(0));
      s.second = detail::emoji_from_json(e.at("pair").at(1), e.at("code_points").at(1));
      read_counts(s, e);
      lex.pairs.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("lexicon: ") + e.what());
  }
  return lex;
}

}  // namespace finmoji
