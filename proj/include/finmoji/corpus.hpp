#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "finmoji/error.hpp"
#include "finmoji/random.hpp"
#include "finmoji/tokenizer.hpp"
#include "finmoji/utf8.hpp"

namespace finmoji {

enum class SentimentLabel { Bullish, Bearish };

inline const char* to_string(SentimentLabel l) { return l == SentimentLabel::Bullish ? "bullish" : "bearish"; }

inline std::optional<SentimentLabel> parse_label(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bullish") return SentimentLabel::Bullish;
  if (lower == "bearish") return SentimentLabel::Bearish;
  return std::nullopt;
}

struct Post {
  std::string id;
  std::optional<std::int64_t> created_at;  // UTC seconds since the epoch
  std::string body;
  std::optional<SentimentLabel> label;
  std::vector<std::string> symbols;

  friend bool operator==(const Post&, const Post&) = default;
};

// Ordered, immutable collection of posts with unique non-empty ids.
class Corpus {
 public:
  Corpus() = default;

  Corpus(std::vector<Post> posts, std::string provenance)
      : posts_(std::move(posts)), provenance_(std::move(provenance)) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(posts_.size());
    for (const auto& p : posts_) {
      if (p.id.empty()) throw DataError("post with empty id");
      if (!seen.insert(p.id).second) throw DataError("duplicate post id: " + p.id);
      if (!utf8::is_valid(p.body)) throw DataError("post " + p.id + " has invalid UTF-8 body");
    }
  }

  const std::vector<Post>& posts() const noexcept { return posts_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return posts_.size(); }
  bool empty() const noexcept { return posts_.empty(); }
  const Post& operator[](std::size_t i) const { return posts_[i]; }
  auto begin() const noexcept { return posts_.begin(); }
  auto end() const noexcept { return posts_.end(); }

 private:
  std::vector<Post> posts_;
  std::string provenance_;
};

enum class DataVariant { TextOnly, EmojiOnly, TextAndEmoji };

inline const char* to_string(DataVariant v) {
  switch (v) {
    case DataVariant::TextOnly: return "text";
    case DataVariant::EmojiOnly: return "emoji";
    case DataVariant::TextAndEmoji: return "text_emoji";
  }
  return "?";
}

inline DataVariant parse_variant(std::string_view s) {
  if (s == "text") return DataVariant::TextOnly;
  if (s == "emoji") return DataVariant::EmojiOnly;
  if (s == "text_emoji" || s == "both") return DataVariant::TextAndEmoji;
  throw std::invalid_argument("unknown data variant: " + std::string(s));
}

struct LabelCounts {
  std::size_t bullish = 0;
  std::size_t bearish = 0;
  std::size_t unlabeled = 0;
};

inline LabelCounts count_labels(const Corpus& c) {
  LabelCounts n;
  for (const auto& p : c) {
    if (!p.label) ++n.unlabeled;
    else if (*p.label == SentimentLabel::Bullish) ++n.bullish;
    else ++n.bearish;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Timestamps

// Parses RFC 3339 date-times ("2021-03-04T05:06:07Z", optional fraction,
// numeric offsets). Fractional seconds are truncated.
inline std::optional<std::int64_t> parse_rfc3339(std::string_view s) {
  auto digits = [&](std::size_t pos, std::size_t n) -> std::optional<int> {
    if (pos + n > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 20) return std::nullopt;
  auto year = digits(0, 4), month = digits(5, 2), day = digits(8, 2);
  auto hour = digits(11, 2), minute = digits(14, 2), second = digits(17, 2);
  if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || s[13] != ':' || s[16] != ':') return std::nullopt;
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  if (*hour > 23 || *minute > 59 || *second > 60) return std::nullopt;

  const std::chrono::year_month_day ymd{std::chrono::year{*year}, std::chrono::month{static_cast<unsigned>(*month)},
                                        std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;
  std::int64_t offset = 0;
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    auto oh = digits(pos + 1, 2), om = digits(pos + 4, 2);
    if (!oh || !om || pos + 3 >= s.size() || s[pos + 3] != ':' || *oh > 23 || *om > 59) return std::nullopt;
    offset = (*oh * 3600 + *om * 60) * (s[pos] == '-' ? -1 : 1);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + *hour * 3600 + *minute * 60 + *second - offset;
}

inline std::string format_rfc3339(std::int64_t t) {
  const std::chrono::sys_seconds tp{std::chrono::seconds{t}};
  const auto day = std::chrono::floor<std::chrono::days>(tp);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{tp - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

// Calendar day (UTC) as "YYYY-MM-DD".
inline std::string utc_date(std::int64_t t) { return format_rfc3339(t).substr(0, 10); }

// ---------------------------------------------------------------------------
// Loading and writing

enum class InputFormat { Jsonl, Csv };

inline InputFormat format_from_path(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? InputFormat::Csv : InputFormat::Jsonl;
}

struct LoadResult {
  Corpus corpus;
  std::size_t skipped = 0;  // malformed records
};

namespace detail {

inline std::vector<std::string> split_symbols(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto bar = s.find('|', start);
    const auto piece = s.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    if (!piece.empty()) out.emplace_back(piece);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

// Fills `label` from a raw field; false if the value is not a valid label.
inline bool assign_label(std::optional<SentimentLabel>& label, std::string_view raw) {
  if (raw.empty() || raw == "null") {
    label.reset();
    return true;
  }
  label = parse_label(raw);
  return label.has_value();
}

inline std::optional<Post> post_from_json(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  Post p;

  auto id = j.find("id");
  if (id == j.end()) return std::nullopt;
  if (id->is_string()) p.id = id->get<std::string>();
  else if (id->is_number_integer()) p.id = id->dump();
  else return std::nullopt;
  if (p.id.empty()) return std::nullopt;

  auto body = j.find("body");
  if (body == j.end() || !body->is_string()) return std::nullopt;
  p.body = body->get<std::string>();
  if (!utf8::is_valid(p.body)) return std::nullopt;

  if (auto ts = j.find("created_at"); ts != j.end()) {
    if (ts->is_string()) p.created_at = parse_rfc3339(ts->get<std::string>());
    else if (ts->is_number_integer()) p.created_at = ts->get<std::int64_t>();
  }

  if (auto label = j.find("label"); label != j.end() && !label->is_null()) {
    if (!label->is_string() || !assign_label(p.label, label->get<std::string>())) return std::nullopt;
  }

  if (auto sym = j.find("symbols"); sym != j.end() && !sym->is_null()) {
    if (sym->is_string()) {
      p.symbols = split_symbols(sym->get<std::string>());
    } else if (sym->is_array()) {
      for (const auto& s : *sym) {
        if (!s.is_string()) return std::nullopt;
        p.symbols.push_back(s.get<std::string>());
      }
    } else {
      return std::nullopt;
    }
  }
  return p;
}

// RFC 4180 record reader. Returns false at end of input; `ok` is cleared for
// records with an unterminated quoted field.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields, bool& ok) {
  fields.clear();
  ok = true;
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (;;) {
    const int ch = in.get();
    if (ch == std::char_traits<char>::eof()) {
      if (quoted) ok = false;
      fields.push_back(std::move(field));
      return true;
    }
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r' && in.peek() == '\n') {
      continue;
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

// Reads posts from a stream. Malformed records are skipped and counted.
// Throws DataError when no record parses or ids collide.
inline LoadResult read_posts(std::istream& in, InputFormat format, const std::string& source = "<stream>") {
  std::vector<Post> posts;
  std::size_t skipped = 0;

  if (format == InputFormat::Jsonl) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (detail::is_blank(line)) continue;
      auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
      auto p = j.is_discarded() ? std::nullopt : detail::post_from_json(j);
      if (p) posts.push_back(std::move(*p));
      else ++skipped;
    }
  } else {
    std::vector<std::string> header;
    bool ok = true;
    if (!detail::read_csv_record(in, header, ok) || !ok) throw DataError(source + ": missing CSV header");
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) return std::nullopt;
      return static_cast<std::size_t>(it - header.begin());
    };
    const auto c_id = column("id"), c_body = column("body");
    const auto c_ts = column("created_at"), c_label = column("label"), c_sym = column("symbols");
    if (!c_id || !c_body) throw DataError(source + ": CSV header needs id and body columns");

    std::vector<std::string> row;
    while (detail::read_csv_record(in, row, ok)) {
      if (row.size() == 1 && row[0].empty()) continue;  // blank line
      if (!ok || row.size() != header.size()) {
        ++skipped;
        continue;
      }
      Post p;
      p.id = row[*c_id];
      p.body = row[*c_body];
      if (c_ts) p.created_at = parse_rfc3339(row[*c_ts]);
      if (c_sym) p.symbols = detail::split_symbols(row[*c_sym]);
      const bool label_ok = !c_label || detail::assign_label(p.label, row[*c_label]);
      if (p.id.empty() || !label_ok || !utf8::is_valid(p.body)) {
        ++skipped;
        continue;
      }
      posts.push_back(std::move(p));
    }
  }

  if (posts.empty()) throw DataError(source + ": zero parseable records");
  return LoadResult{Corpus(std::move(posts), source), skipped};
}

inline LoadResult load_posts(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return read_posts(in, format, path.string());
}

inline LoadResult load_posts(const std::filesystem::path& path) { return load_posts(path, format_from_path(path)); }

inline nlohmann::ordered_json to_json(const Post& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["created_at"] = p.created_at ? nlohmann::ordered_json(format_rfc3339(*p.created_at)) : nlohmann::ordered_json(nullptr);
  j["body"] = p.body;
  j["label"] = p.label ? nlohmann::ordered_json(to_string(*p.label)) : nlohmann::ordered_json(nullptr);
  j["symbols"] = p.symbols;
  return j;
}

inline void write_jsonl(const Corpus& c, std::ostream& out) {
  for (const auto& p : c) out << to_json(p).dump() << '\n';
}

inline void write_csv(const Corpus& c, std::ostream& out) {
  auto quote = [](std::string_view s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q.push_back('"');
      q.push_back(ch);
    }
    q.push_back('"');
    return q;
  };
  out << "id,created_at,body,label,symbols\r\n";
  for (const auto& p : c) {
    std::string symbols;
    for (std::size_t i = 0; i < p.symbols.size(); ++i) symbols += (i ? "|" : "") + p.symbols[i];
    out << quote(p.id) << ',' << (p.created_at ? format_rfc3339(*p.created_at) : "") << ',' << quote(p.body)
        << ',' << (p.label ? to_string(*p.label) : "") << ',' << quote(symbols) << "\r\n";
  }
}

// ---------------------------------------------------------------------------
// Filters

template <typename Pred>
Corpus filter_posts(const Corpus& c, Pred keep, std::string_view step) {
  std::vector<Post> out;
  for (const auto& p : c) {
    if (keep(p)) out.push_back(p);
  }
  return Corpus(std::move(out), c.provenance() + " | " + std::string(step));
}

inline Corpus filter_emoji_posts(const Corpus& c, TokenizerMode mode = TokenizerMode::PaperRegex) {
  return filter_posts(c, [mode](const Post& p) { return !extract_emojis(p.body, mode).empty(); },
                      "filter_emoji_posts");
}

inline Corpus filter_labeled(const Corpus& c) {
  return filter_posts(c, [](const Post& p) { return p.label.has_value(); }, "filter_labeled");
}

// Keeps the minority class whole and a uniform subset (without replacement)
// of the majority class. Post order is preserved.
inline Corpus balance_undersample(const Corpus& c, std::uint64_t seed) {
  std::vector<std::size_t> bull, bear;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].label) throw DataError("balance_undersample: post " + c[i].id + " is unlabeled");
    (*c[i].label == SentimentLabel::Bullish ? bull : bear).push_back(i);
  }
  if (bull.empty() || bear.empty()) throw DataError("balance_undersample: a class is absent");

  auto& majority = bull.size() >= bear.size() ? bull : bear;
  const std::size_t keep = std::min(bull.size(), bear.size());
  Rng rng(seed);
  shuffle(majority, rng);
  majority.resize(keep);

  std::vector<std::size_t> selected(bull);
  selected.insert(selected.end(), bear.begin(), bear.end());
  std::sort(selected.begin(), selected.end());

  std::vector<Post> out;
  out.reserve(selected.size());
  for (auto i : selected) out.push_back(c[i]);
  return Corpus(std::move(out), c.provenance() + " | balance_undersample(seed=" + std::to_string(seed) + ")");
}

struct Split {
  Corpus train;
  Corpus test;
};

// Seeded shuffle split with |test| = round(test_fraction * |c|). Stratified
// by label when every post is labeled.
inline Split split(const Corpus& c, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must lie in (0, 1)");
  }
  if (c.size() < 2) throw DataError("split: need at least two posts");

  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(c.size())));
  const auto counts = count_labels(c);
  std::vector<std::vector<std::size_t>> strata;
  if (counts.unlabeled == 0) {
    strata.resize(2);
    for (std::size_t i = 0; i < c.size(); ++i) strata[*c[i].label == SentimentLabel::Bullish ? 0 : 1].push_back(i);
  } else {
    strata.emplace_back(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) strata[0][i] = i;
  }

  // Largest-remainder allocation of the test quota across strata.
  std::vector<std::size_t> quota(strata.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const double exact = test_fraction * static_cast<double>(strata[s].size());
    quota[s] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[s];
    remainders.emplace_back(-(exact - std::floor(exact)), s);
  }
  std::stable_sort(remainders.begin(), remainders.end());
  for (std::size_t k = 0; assigned < n_test && k < remainders.size(); ++k) {
    const auto s = remainders[k].second;
    if (quota[s] < strata[s].size()) ++quota[s], ++assigned;
  }
  for (std::size_t s = 0; assigned < n_test && s < strata.size(); ++s) {
    while (assigned < n_test && quota[s] < strata[s].size()) ++quota[s], ++assigned;
  }

  Rng rng(seed);
  std::vector<bool> in_test(c.size(), false);
  for (std::size_t s = 0; s < strata.size(); ++s) {
    shuffle(strata[s], rng);
    for (std::size_t k = 0; k < quota[s]; ++k) in_test[strata[s][k]] = true;
  }

  std::vector<Post> train, test;
  for (std::size_t i = 0; i < c.size(); ++i) (in_test[i] ? test : train).push_back(c[i]);
  const std::string tag = "(fraction=" + std::to_string(test_fraction) + ",seed=" + std::to_string(seed) + ")";
  return Split{Corpus(std::move(train), c.provenance() + " | split.train" + tag),
               Corpus(std::move(test), c.provenance() + " | split.test" + tag)};
}

// ---------------------------------------------------------------------------
// Data variants

inline std::string derive_variant(std::string_view body, DataVariant v,
                                  TokenizerMode mode = TokenizerMode::PaperRegex) {
  switch (v) {
    case DataVariant::TextOnly:
      return strip_emojis(body, mode);
    case DataVariant::EmojiOnly: {
      std::string out;
      for (const auto& e : extract_emojis(body, mode)) {
        if (!out.empty()) out.push_back(' ');
        out += e;
      }
      return out;
    }
    case DataVariant::TextAndEmoji:
      return std::string(body);
  }
  return std::string(body);
}

inline std::string derive_variant(const Post& p, DataVariant v, TokenizerMode mode = TokenizerMode::PaperRegex) {
  return derive_variant(p.body, v, mode);
}

// Corpus with every body replaced by its projection onto `v`.
inline Corpus project(const Corpus& c, DataVariant v, TokenizerMode mode = TokenizerMode::PaperRegex) {
  if (v == DataVariant::TextAndEmoji) return c;
  std::vector<Post> out(c.posts());
  for (auto& p : out) p.body = derive_variant(p.body, v, mode);
  return Corpus(std::move(out), c.provenance() + " | variant=" + to_string(v));
}

}  // namespace finmoji
