#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "finmoji/corpus.hpp"
#include "finmoji/random.hpp"

namespace finmoji {

// Generator for labeled posts with a controllable emoji signal. Each post
// carries its class marker emoji, some neutral emojis, and filler text in
// which a fraction of words lean towards the true class. Labels are then
// flipped with probability `label_noise`.
struct SyntheticConfig {
  std::size_t n_posts = 20000;
  double label_noise = 0.05;
  std::uint64_t seed = 42;
  std::string bullish_emoji = "🚀";
  std::string bearish_emoji = "🩸";
  std::vector<std::string> neutral_emojis = {"👀", "🤔", "😂", "🔥", "💰", "📊", "🙏", "😎"};
  double neutral_emoji_rate = 0.5;  // expected neutral emojis per post
  std::size_t min_words = 4;
  std::size_t max_words = 14;
  double text_signal = 0.12;        // share of words drawn from the class-leaning lists
  std::int64_t start_time = 1609459200;  // 2021-01-01T00:00:00Z
  std::size_t days = 60;
  std::string id_prefix = "syn";
};

namespace detail {

inline constexpr auto kNeutralWords = std::to_array<std::string_view>({
    "the",    "a",       "stock",   "market",  "today",   "week",    "price",   "chart",   "volume",  "news",
    "earnings", "call",  "open",    "close",   "shares",  "trade",   "after",   "hours",   "premarket", "watch",
    "list",   "this",    "that",    "what",    "when",    "where",   "just",    "still",   "again",   "here",
    "now",    "guys",    "anyone",  "think",   "know",    "see",     "look",    "at",      "on",      "in",
    "for",    "with",    "from",   "to",       "of",      "and",     "or",      "but",     "is",      "are",
    "was",    "be",      "it",      "we",      "they",    "you",     "i",       "my",      "our",     "their",
    "fed",    "rate",    "cpi",     "report",  "q3",      "q4",      "guidance", "revenue", "float",  "options",
    "expiry", "friday",  "monday",  "level",   "support", "line",    "gap",     "fill",    "ticker",  "sector",
    "tech",   "energy",  "crypto",  "coin",    "chain",   "wallet",  "exchange", "index",  "etf",     "fund",
    "analyst", "target", "upgrade", "filing",  "volume",  "float"});

inline constexpr auto kBullishWords = std::to_array<std::string_view>({
    "moon", "calls", "long", "breakout", "buy", "rally", "squeeze", "higher", "bullish", "rip", "hold", "green"});

inline constexpr auto kBearishWords = std::to_array<std::string_view>({
    "puts", "short", "dump", "crash", "sell", "lower", "bearish", "drop", "red", "tank", "overvalued", "bagholder"});

inline constexpr auto kTickers = std::to_array<std::string_view>({"BTC", "AAPL", "TSLA", "GME", "ETH", "SPY"});

}  // namespace detail

inline Corpus make_synthetic_corpus(const SyntheticConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<Post> posts;
  posts.reserve(cfg.n_posts);
  for (std::size_t i = 0; i < cfg.n_posts; ++i) {
    const bool bullish = uniform_index(rng, 2) == 0;
    std::vector<std::string> pieces;

    const std::size_t span = cfg.max_words - cfg.min_words + 1;
    const std::size_t n_words = cfg.min_words + static_cast<std::size_t>(uniform_index(rng, span));
    for (std::size_t w = 0; w < n_words; ++w) {
      if (uniform_unit(rng) < cfg.text_signal) {
        const auto& lean = bullish ? detail::kBullishWords : detail::kBearishWords;
        pieces.emplace_back(lean[uniform_index(rng, lean.size())]);
      } else {
        pieces.emplace_back(detail::kNeutralWords[uniform_index(rng, detail::kNeutralWords.size())]);
      }
    }
    const auto ticker = detail::kTickers[uniform_index(rng, detail::kTickers.size())];
    pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, pieces.size() + 1)),
                  "$" + std::string(ticker));

    const std::string& marker = bullish ? cfg.bullish_emoji : cfg.bearish_emoji;
    const std::size_t repeats = 1 + static_cast<std::size_t>(uniform_index(rng, 3));
    std::string marker_run;
    for (std::size_t r = 0; r < repeats; ++r) marker_run += marker;
    pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, pieces.size() + 1)), marker_run);

    if (!cfg.neutral_emojis.empty()) {
      while (uniform_unit(rng) < cfg.neutral_emoji_rate / (1.0 + cfg.neutral_emoji_rate)) {
        const auto& e = cfg.neutral_emojis[uniform_index(rng, cfg.neutral_emojis.size())];
        pieces.insert(pieces.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, pieces.size() + 1)), e);
      }
    }

    Post p;
    p.id = cfg.id_prefix + "-" + std::to_string(i);
    for (std::size_t k = 0; k < pieces.size(); ++k) p.body += (k ? " " : "") + pieces[k];
    const bool flip = uniform_unit(rng) < cfg.label_noise;
    p.label = (bullish != flip) ? SentimentLabel::Bullish : SentimentLabel::Bearish;
    const auto day_seconds = static_cast<std::int64_t>(uniform_index(rng, cfg.days * 86400));
    p.created_at = cfg.start_time + day_seconds;
    p.symbols = {std::string(ticker)};
    posts.push_back(std::move(p));
  }
  return Corpus(std::move(posts), "synthetic(seed=" + std::to_string(cfg.seed) + ",n=" + std::to_string(cfg.n_posts) + ")");
}

}  // namespace finmoji
