#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "finmoji/corpus.hpp"
#include "finmoji/error.hpp"
#include "finmoji/tokenizer.hpp"
#include "finmoji/utf8.hpp"

namespace finmoji {

enum class FrequencyBasis { Presence, Occurrence };

struct FrequencyDistribution {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  FrequencyBasis basis = FrequencyBasis::Presence;

  void add(const std::string& symbol, std::uint64_t n = 1) {
    counts[symbol] += n;
    total += n;
  }
  double relative(const std::string& symbol) const {
    auto it = counts.find(symbol);
    return (it == counts.end() || total == 0) ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
  }
  std::uint64_t count(const std::string& symbol) const {
    auto it = counts.find(symbol);
    return it == counts.end() ? 0 : it->second;
  }
};

// Number of posts containing each emoji; repeats within a post count once.
inline FrequencyDistribution presence_frequencies(const Corpus& c, TokenizerMode mode = TokenizerMode::PaperRegex) {
  FrequencyDistribution d;
  d.basis = FrequencyBasis::Presence;
  for (const auto& p : c) {
    auto e = extract_emojis(p.body, mode);
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    for (const auto& s : e) d.add(s);
  }
  return d;
}

// Every token of the given kind counts.
inline FrequencyDistribution occurrence_frequencies(const Corpus& c, TokenKind kind,
                                                    TokenizerMode mode = TokenizerMode::PaperRegex) {
  FrequencyDistribution d;
  d.basis = FrequencyBasis::Occurrence;
  for (const auto& p : c) {
    for (const auto& t : tokenize(p.body, mode)) {
      if (t.kind == kind) d.add(t.text);
    }
  }
  return d;
}

struct TestResult {
  std::string method;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool exact = false;
  double df = 0.0;  // chi-square only
};

// ---------------------------------------------------------------------------
// Mann-Whitney U

namespace detail {

// Twice the midranks of the pooled sample (integers), plus the tie term
// sum(t^3 - t).
struct PooledRanks {
  std::vector<std::int64_t> twice_rank;  // indexed like the pooled input
  double tie_term = 0.0;
};

inline PooledRanks pooled_ranks(std::span<const double> pooled) {
  std::vector<std::size_t> order(pooled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
  PooledRanks r;
  r.twice_rank.resize(pooled.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && pooled[order[j]] == pooled[order[i]]) ++j;
    const auto twice = static_cast<std::int64_t>(i + 1 + j);  // (i+1) + j, 1-based ends
    for (std::size_t k = i; k < j; ++k) r.twice_rank[order[k]] = twice;
    const double t = static_cast<double>(j - i);
    r.tie_term += t * t * t - t;
    i = j;
  }
  return r;
}

inline void require_samples(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.empty() || b.empty()) throw std::invalid_argument(std::string(who) + ": empty sample");
  for (double v : a) {
    if (std::isnan(v)) throw std::invalid_argument(std::string(who) + ": NaN in sample");
  }
  for (double v : b) {
    if (std::isnan(v)) throw std::invalid_argument(std::string(who) + ": NaN in sample");
  }
}

}  // namespace detail

// U statistic of sample `a` from midrank sums. Two-sided p-value: exact
// permutation distribution of the rank sum when n_a * n_b <= exact_limit,
// otherwise the tie-corrected normal approximation with continuity
// correction.
inline TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 std::size_t exact_limit = 400) {
  detail::require_samples(a, b, "mann_whitney_u");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = detail::pooled_ranks(pooled);

  std::int64_t r2_a = 0;
  for (std::size_t i = 0; i < na; ++i) r2_a += ranks.twice_rank[i];
  const auto u2_a = r2_a - static_cast<std::int64_t>(na * (na + 1));

  TestResult res;
  res.n_a = na;
  res.n_b = nb;
  res.statistic = static_cast<double>(u2_a) / 2.0;

  if (na * nb <= exact_limit) {
    // Distribution of the twice-rank-sum over all subsets of size k drawn
    // from the pooled sample; k is the smaller group.
    const bool a_small = na <= nb;
    const std::size_t k = a_small ? na : nb;
    std::int64_t observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((i < na) == a_small) observed += ranks.twice_rank[i];
    }
    const auto max_sum = static_cast<std::size_t>(n * (n + 1));
    std::vector<std::vector<std::uint64_t>> ways(k + 1, std::vector<std::uint64_t>(max_sum + 1, 0));
    ways[0][0] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::size_t>(ranks.twice_rank[i]);
      for (std::size_t m = std::min(k, i + 1); m >= 1; --m) {
        auto& dst = ways[m];
        const auto& src = ways[m - 1];
        for (std::size_t s = max_sum; s >= r; --s) dst[s] += src[s - r];
      }
    }
    const auto center = static_cast<std::int64_t>(k * (n + 1));
    const auto dev = std::llabs(observed - center);
    std::uint64_t extreme = 0, total = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      total += ways[k][s];
      if (std::llabs(static_cast<std::int64_t>(s) - center) >= dev) extreme += ways[k][s];
    }
    res.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    res.exact = true;
    res.method = "mann-whitney-u/exact";
    return res;
  }

  const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
  const double dn = static_cast<double>(n);
  const double var = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                     ((dn + 1.0) - ranks.tie_term / (dn * (dn - 1.0)));
  res.method = "mann-whitney-u/normal";
  if (var <= 0.0) {
    res.p_value = 1.0;
    return res;
  }
  const double z = std::max(0.0, std::abs(res.statistic - mu) - 0.5) / std::sqrt(var);
  res.p_value = std::clamp(std::erfc(z / std::numbers::sqrt2), 0.0, 1.0);
  return res;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

namespace detail {

// max |i*nb - j*na| over the pooled sorted values; D = result / (na*nb).
// `in_a` flags the pooled sorted values belonging to sample a.
inline std::int64_t ks_scaled_distance(std::span<const double> sorted, const std::vector<bool>& in_a,
                                       std::int64_t na, std::int64_t nb) {
  std::int64_t ca = 0, cb = 0, best = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) {
      (in_a[j] ? ca : cb) += 1;
      ++j;
    }
    best = std::max<std::int64_t>(best, std::llabs(ca * nb - cb * na));
    i = j;
  }
  return best;
}

}  // namespace detail

// Survival function of the Kolmogorov distribution, P(K > lambda).
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    // Theta-function form converges fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
      cdf += term;
      if (term < 1e-300) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sf += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

// D = sup |ECDF_a - ECDF_b|. Exact permutation p-value when
// n_a + n_b <= exact_limit, asymptotic Kolmogorov otherwise.
inline TestResult ks_two_sample(std::span<const double> a, std::span<const double> b,
                                std::size_t exact_limit = 20) {
  detail::require_samples(a, b, "ks_two_sample");
  const auto na = static_cast<std::int64_t>(a.size()), nb = static_cast<std::int64_t>(b.size());
  const std::size_t n = a.size() + b.size();

  std::vector<std::pair<double, bool>> pooled;
  for (double v : a) pooled.emplace_back(v, true);
  for (double v : b) pooled.emplace_back(v, false);
  std::stable_sort(pooled.begin(), pooled.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<double> sorted(n);
  std::vector<bool> in_a(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = pooled[i].first, in_a[i] = pooled[i].second;

  const auto observed = detail::ks_scaled_distance(sorted, in_a, na, nb);
  TestResult res;
  res.n_a = a.size();
  res.n_b = b.size();
  res.statistic = static_cast<double>(observed) / static_cast<double>(na * nb);

  if (n <= exact_limit) {
    std::uint64_t extreme = 0, total = 0;
    std::vector<bool> flags(n);
    // Gosper's hack over all n-bit masks with n_a bits set.
    std::uint64_t mask = (std::uint64_t{1} << na) - 1;
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (mask < limit) {
      for (std::size_t i = 0; i < n; ++i) flags[i] = (mask >> i) & 1U;
      if (detail::ks_scaled_distance(sorted, flags, na, nb) >= observed) ++extreme;
      ++total;
      const std::uint64_t c = mask & (0 - mask);
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
    res.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    res.exact = true;
    res.method = "kolmogorov-smirnov/exact";
    return res;
  }
  const double ne = static_cast<double>(na) * static_cast<double>(nb) / static_cast<double>(na + nb);
  res.p_value = kolmogorov_sf(std::sqrt(ne) * res.statistic);
  res.method = "kolmogorov-smirnov/asymptotic";
  return res;
}

// ---------------------------------------------------------------------------
// Chi-square and Cramér's V

// Upper tail of the chi-square distribution.
inline double chi_square_sf(double x, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("chi_square_sf: df must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

// Pearson chi-square test of independence on an r x k table of counts.
inline TestResult chi_square(const std::vector<std::vector<double>>& table) {
  const std::size_t r = table.size();
  if (r < 2) throw std::invalid_argument("chi_square: need at least two rows");
  const std::size_t k = table.front().size();
  if (k < 2) throw std::invalid_argument("chi_square: need at least two columns");
  std::vector<double> row(r, 0.0), col(k, 0.0);
  double n = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (table[i].size() != k) throw std::invalid_argument("chi_square: ragged table");
    for (std::size_t j = 0; j < k; ++j) {
      const double v = table[i][j];
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("chi_square: counts must be finite and >= 0");
      row[i] += v, col[j] += v, n += v;
    }
  }
  for (double m : row) {
    if (m <= 0.0) throw NumericError("chi_square: zero row marginal");
  }
  for (double m : col) {
    if (m <= 0.0) throw NumericError("chi_square: zero column marginal");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double expected = row[i] * col[j] / n;
      const double d = table[i][j] - expected;
      stat += d * d / expected;
    }
  }
  TestResult res;
  res.method = "chi-square";
  res.statistic = stat;
  res.df = static_cast<double>((r - 1) * (k - 1));
  res.p_value = chi_square_sf(stat, res.df);
  res.n_a = r;
  res.n_b = k;
  return res;
}

// V = sqrt(chi2 / (n * min(k - 1, r - 1))).
inline double cramers_v(double chi2, double n, std::size_t r, std::size_t k) {
  if (!(n > 0.0)) throw std::invalid_argument("cramers_v: n must be positive");
  if (std::min(r, k) < 2) throw std::invalid_argument("cramers_v: need at least a 2 x 2 table");
  if (chi2 < 0.0) throw std::invalid_argument("cramers_v: negative chi-square");
  return std::sqrt(chi2 / (n * static_cast<double>(std::min(k, r) - 1)));
}

// ---------------------------------------------------------------------------
// Entropy

struct EntropyReport {
  double entropy_bits = 0.0;
  double mass = 0.9;
  bool renormalized = true;
  std::size_t kept_symbols = 0;
  std::size_t unique_symbols = 0;
  double kept_mass = 0.0;          // actual share covered by the kept prefix
  double avg_token_length = 0.0;   // code points, frequency-weighted over kept symbols
};

// Shannon entropy (bits) of the shortest most-frequent prefix whose share
// of the total reaches `mass`. Ties in frequency are ordered by code point.
inline EntropyReport entropy_top_mass(const FrequencyDistribution& d, double mass = 0.9, bool renormalize = true) {
  if (d.total == 0 || d.counts.empty()) throw NumericError("entropy_top_mass: empty distribution");
  if (!(mass > 0.0 && mass <= 1.0)) throw std::invalid_argument("entropy_top_mass: mass must lie in (0, 1]");

  std::vector<std::pair<std::string, std::uint64_t>> sorted(d.counts.begin(), d.counts.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.second > y.second; });

  const double total = static_cast<double>(d.total);
  std::uint64_t kept_count = 0;
  std::size_t kept = 0;
  while (kept < sorted.size()) {
    kept_count += sorted[kept].second;
    ++kept;
    if (static_cast<double>(kept_count) / total >= mass) break;
  }

  EntropyReport rep;
  rep.mass = mass;
  rep.renormalized = renormalize;
  rep.kept_symbols = kept;
  rep.unique_symbols = sorted.size();
  rep.kept_mass = static_cast<double>(kept_count) / total;
  const double denom = renormalize ? static_cast<double>(kept_count) : total;
  double h = 0.0, len = 0.0;
  for (std::size_t i = 0; i < kept; ++i) {
    const double c = static_cast<double>(sorted[i].second);
    const double p = c / denom;
    h -= p * std::log2(p);
    len += c * static_cast<double>(utf8::length(sorted[i].first));
  }
  rep.entropy_bits = h;
  rep.avg_token_length = len / static_cast<double>(kept_count);
  return rep;
}

// ---------------------------------------------------------------------------
// Cross-corpus comparison

enum class RankTestInput {
  FrequencyVector,  // per-emoji relative frequencies over the union of top emojis
  PostEmojiCounts,  // distinct emojis per emoji-bearing post
};

inline const char* to_string(RankTestInput m) {
  return m == RankTestInput::FrequencyVector ? "frequency-vector" : "post-emoji-counts";
}

struct RankRow {
  std::string emoji;
  double rank_a = 0.0;
  std::optional<double> rank_b;  // absent when the emoji never occurs in b
  double rel_freq_a = 0.0;
  double rel_freq_b = 0.0;
};

struct ComparisonReport {
  FrequencyDistribution a;
  FrequencyDistribution b;
  std::vector<RankRow> rank_table;
  RankTestInput test_input = RankTestInput::FrequencyVector;
  std::vector<std::string> compared_emojis;
  TestResult mann_whitney;
  TestResult kolmogorov_smirnov;
  TestResult chi_square;
  double cramers_v = 0.0;
};

// Symbols by descending count, ties by code point.
inline std::vector<std::string> ranked_symbols(const FrequencyDistribution& d) {
  std::vector<std::pair<std::string, std::uint64_t>> v(d.counts.begin(), d.counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::string> out;
  for (auto& [s, c] : v) out.push_back(std::move(s));
  return out;
}

// Frequency ranks (1 = most frequent) with ties sharing their mean rank.
inline std::map<std::string, double> frequency_ranks(const FrequencyDistribution& d) {
  const auto order = ranked_symbols(d);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    const auto c = d.count(order[i]);
    while (j < order.size() && d.count(order[j]) == c) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) out[order[k]] = mid;
    i = j;
  }
  return out;
}

inline ComparisonReport compare_corpora(const Corpus& a, const Corpus& b, std::size_t top_n = 20,
                                        RankTestInput input = RankTestInput::FrequencyVector,
                                        TokenizerMode mode = TokenizerMode::PaperRegex) {
  ComparisonReport rep;
  rep.a = presence_frequencies(a, mode);
  rep.b = presence_frequencies(b, mode);
  rep.test_input = input;
  if (rep.a.total == 0 || rep.b.total == 0) throw DataError("compare: a corpus contains no emojis");

  const auto order_a = ranked_symbols(rep.a), order_b = ranked_symbols(rep.b);
  const auto ranks_a = frequency_ranks(rep.a), ranks_b = frequency_ranks(rep.b);
  for (std::size_t i = 0; i < std::min(top_n, order_a.size()); ++i) {
    RankRow row;
    row.emoji = order_a[i];
    row.rank_a = ranks_a.at(row.emoji);
    if (auto it = ranks_b.find(row.emoji); it != ranks_b.end()) row.rank_b = it->second;
    row.rel_freq_a = rep.a.relative(row.emoji);
    row.rel_freq_b = rep.b.relative(row.emoji);
    rep.rank_table.push_back(std::move(row));
  }

  std::vector<std::string> uni(order_a.begin(), order_a.begin() + static_cast<std::ptrdiff_t>(std::min(top_n, order_a.size())));
  uni.insert(uni.end(), order_b.begin(), order_b.begin() + static_cast<std::ptrdiff_t>(std::min(top_n, order_b.size())));
  std::sort(uni.begin(), uni.end());
  uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
  rep.compared_emojis = uni;

  std::vector<double> xa, xb;
  if (input == RankTestInput::FrequencyVector) {
    for (const auto& e : uni) xa.push_back(rep.a.relative(e)), xb.push_back(rep.b.relative(e));
  } else {
    auto counts = [mode](const Corpus& c, std::vector<double>& out) {
      for (const auto& p : c) {
        auto e = extract_emojis(p.body, mode);
        std::sort(e.begin(), e.end());
        const auto n = std::unique(e.begin(), e.end()) - e.begin();
        if (n > 0) out.push_back(static_cast<double>(n));
      }
    };
    counts(a, xa);
    counts(b, xb);
  }
  rep.mann_whitney = mann_whitney_u(xa, xb);
  rep.kolmogorov_smirnov = ks_two_sample(xa, xb);

  std::vector<std::vector<double>> table;
  double n = 0.0;
  for (const auto& e : uni) {
    const auto ca = static_cast<double>(rep.a.count(e)), cb = static_cast<double>(rep.b.count(e));
    table.push_back({ca, cb});
    n += ca + cb;
  }
  if (table.size() < 2) throw DataError("compare: need at least two distinct emojis across corpora");
  rep.chi_square = chi_square(table);
  rep.cramers_v = cramers_v(rep.chi_square.statistic, n, table.size(), 2);
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const TestResult& t) {
  nlohmann::ordered_json j{{"method", t.method}, {"statistic", t.statistic}, {"p_value", t.p_value},
                           {"n_a", t.n_a},       {"n_b", t.n_b},             {"exact", t.exact}};
  if (t.df > 0.0) j["df"] = t.df;
  return j;
}

inline nlohmann::ordered_json to_json(const EntropyReport& r) {
  return {{"entropy_bits", r.entropy_bits},     {"mass", r.mass},
          {"renormalized", r.renormalized},     {"kept_symbols", r.kept_symbols},
          {"unique_symbols", r.unique_symbols}, {"kept_mass", r.kept_mass},
          {"avg_token_length", r.avg_token_length}};
}

inline nlohmann::ordered_json to_json(const FrequencyDistribution& d) {
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& s : ranked_symbols(d)) counts[s] = d.count(s);
  return {{"basis", d.basis == FrequencyBasis::Presence ? "presence" : "occurrence"},
          {"total", d.total},
          {"counts", std::move(counts)}};
}

inline nlohmann::ordered_json to_json(const ComparisonReport& r) {
  nlohmann::ordered_json j;
  j["distributions"] = {{"a", to_json(r.a)}, {"b", to_json(r.b)}};
  j["rank_table"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rank_table) {
    j["rank_table"].push_back({{"emoji", row.emoji},
                               {"rank_a", row.rank_a},
                               {"rank_b", row.rank_b ? nlohmann::ordered_json(*row.rank_b) : nlohmann::ordered_json(nullptr)},
                               {"rel_freq_a", row.rel_freq_a},
                               {"rel_freq_b", row.rel_freq_b}});
  }
  j["test_input"] = to_string(r.test_input);
  j["compared_emojis"] = r.compared_emojis;
  j["tests"] = {to_json(r.mann_whitney), to_json(r.kolmogorov_smirnov), to_json(r.chi_square)};
  j["cramers_v"] = r.cramers_v;
  return j;
}

}  // namespace finmoji
