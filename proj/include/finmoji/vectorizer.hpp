#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <functional>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "finmoji/error.hpp"
#include "finmoji/tokenizer.hpp"

namespace finmoji {

struct SparseEntry {
  std::uint32_t index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sorted, zero-free sparse row.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<SparseEntry> entries;

  std::size_t nnz() const noexcept { return entries.size(); }

  double dot(std::span<const double> dense) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.value * dense[e.index];
    return s;
  }

  std::optional<double> at(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const SparseEntry& e, std::uint32_t i) { return e.index < i; });
    if (it == entries.end() || it->index != index) return std::nullopt;
    return it->value;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

namespace detail {

inline std::string_view token_text(const Token& t) { return t.text; }
inline std::string_view token_text(std::string_view s) { return s; }

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

}  // namespace detail

// A document is any range of tokens or strings.
template <typename D>
concept Document = std::ranges::input_range<D> && requires(std::ranges::range_reference_t<D> t) {
  { detail::token_text(t) } -> std::convertible_to<std::string_view>;
};

// Vocabulary plus document frequencies. Weights follow
//   w(t) = (count(t) / doc_length) * ln(1 + n_docs / df(t))
// where doc_length counts every token, in-vocabulary or not.
class TfIdfModel {
 public:
  static constexpr std::string_view kFormulaId = "paper-lognorm-v1";
  static constexpr int kFormatVersion = 1;

  TfIdfModel() = default;

  template <std::ranges::input_range Docs>
    requires Document<std::ranges::range_reference_t<Docs>>
  static TfIdfModel fit(const Docs& docs) {
    TfIdfModel m;
    std::vector<std::uint32_t> last_seen;  // last doc that touched each column
    std::uint64_t n = 0;
    bool any_token = false;
    for (const auto& doc : docs) {
      ++n;
      for (const auto& tok : doc) {
        any_token = true;
        const auto text = detail::token_text(tok);
        auto it = m.index_.find(text);
        const bool inserted = it == m.index_.end();
        if (inserted) it = m.index_.emplace(std::string(text), static_cast<std::uint32_t>(m.vocab_.size())).first;
        if (inserted) {
          m.vocab_.emplace_back(text);
          m.df_.push_back(0);
          last_seen.push_back(0);
        }
        const auto col = it->second;
        if (last_seen[col] != n) {
          last_seen[col] = static_cast<std::uint32_t>(n);
          ++m.df_[col];
        }
      }
    }
    if (n == 0) throw DataError("TfIdfModel::fit: no documents");
    if (!any_token) throw DataError("TfIdfModel::fit: all documents are empty");
    m.n_docs_ = n;
    return m;
  }

  // Raw per-token counts over the vocabulary (the input for Naive Bayes).
  template <Document Doc>
  SparseVector counts(const Doc& doc) const {
    auto [v, length] = count_in_vocab(doc);
    (void)length;
    return v;
  }

  template <Document Doc>
  SparseVector transform(const Doc& doc) const {
    auto [v, length] = count_in_vocab(doc);
    if (length == 0) return v;
    double norm = 0.0;
    for (auto& e : v.entries) {
      const double tf = e.value / static_cast<double>(length);
      e.value = tf * idf(e.index);
      norm += e.value * e.value;
    }
    if (l2_normalize_ && norm > 0.0) {
      const double inv = 1.0 / std::sqrt(norm);
      for (auto& e : v.entries) e.value *= inv;
    }
    return v;
  }

  template <std::ranges::input_range Docs>
    requires Document<std::ranges::range_reference_t<Docs>>
  std::vector<SparseVector> transform_batch(const Docs& docs) const {
    std::vector<SparseVector> out;
    if constexpr (std::ranges::sized_range<Docs>) out.reserve(std::ranges::size(docs));
    for (const auto& d : docs) out.push_back(transform(d));
    return out;
  }

  double idf(std::uint32_t column) const {
    return std::log1p(static_cast<double>(n_docs_) / static_cast<double>(df_[column]));
  }

  std::optional<std::uint32_t> index_of(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t dim() const noexcept { return vocab_.size(); }
  std::uint64_t n_docs() const noexcept { return n_docs_; }
  const std::vector<std::string>& vocab() const noexcept { return vocab_; }
  const std::vector<std::uint64_t>& df() const noexcept { return df_; }
  bool l2_normalize() const noexcept { return l2_normalize_; }
  void set_l2_normalize(bool on) noexcept { l2_normalize_ = on; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["formula_id"] = kFormulaId;
    j["version"] = kFormatVersion;
    j["n_docs"] = n_docs_;
    j["l2_normalize"] = l2_normalize_;
    j["vocab"] = vocab_;
    j["df"] = df_;
    return j;
  }

  template <typename Json>
  static TfIdfModel from_json(const Json& j) {
    if (!j.is_object() || j.value("formula_id", std::string{}) != kFormulaId) {
      throw DataError("vectorizer: unsupported formula_id");
    }
    if (j.value("version", 0) != kFormatVersion) throw DataError("vectorizer: unsupported format version");
    TfIdfModel m;
    try {
      m.n_docs_ = j.at("n_docs").template get<std::uint64_t>();
      m.l2_normalize_ = j.value("l2_normalize", false);
      m.vocab_ = j.at("vocab").template get<std::vector<std::string>>();
      m.df_ = j.at("df").template get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("vectorizer: ") + e.what());
    }
    if (m.vocab_.size() != m.df_.size()) throw DataError("vectorizer: vocab/df length mismatch");
    for (std::size_t i = 0; i < m.vocab_.size(); ++i) {
      if (m.df_[i] < 1 || m.df_[i] > m.n_docs_) throw DataError("vectorizer: df out of range");
      if (!m.index_.try_emplace(m.vocab_[i], static_cast<std::uint32_t>(i)).second) {
        throw DataError("vectorizer: duplicate vocabulary entry");
      }
    }
    return m;
  }

  friend bool operator==(const TfIdfModel& a, const TfIdfModel& b) {
    return a.vocab_ == b.vocab_ && a.df_ == b.df_ && a.n_docs_ == b.n_docs_ && a.l2_normalize_ == b.l2_normalize_;
  }

 private:
  template <Document Doc>
  std::pair<SparseVector, std::size_t> count_in_vocab(const Doc& doc) const {
    std::vector<std::uint32_t> cols;
    std::size_t length = 0;
    for (const auto& tok : doc) {
      ++length;
      if (auto it = index_.find(detail::token_text(tok)); it != index_.end()) cols.push_back(it->second);
    }
    std::sort(cols.begin(), cols.end());
    SparseVector v{dim(), {}};
    for (std::size_t i = 0; i < cols.size();) {
      std::size_t j = i;
      while (j < cols.size() && cols[j] == cols[i]) ++j;
      v.entries.push_back({cols[i], static_cast<double>(j - i)});
      i = j;
    }
    return {std::move(v), length};
  }

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t, detail::StringHash, std::equal_to<>> index_;
  std::vector<std::uint64_t> df_;
  std::uint64_t n_docs_ = 0;
  bool l2_normalize_ = false;
};

}  // namespace finmoji
