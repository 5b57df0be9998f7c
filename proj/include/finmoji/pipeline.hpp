#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "finmoji/classifier.hpp"
#include "finmoji/corpus.hpp"
#include "finmoji/error.hpp"
#include "finmoji/random.hpp"
#include "finmoji/tokenizer.hpp"
#include "finmoji/unicode_tables.hpp"
#include "finmoji/vectorizer.hpp"

namespace finmoji {

inline std::vector<TokenSequence> tokenize_corpus(const Corpus& c, DataVariant v,
                                                  TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::vector<TokenSequence> out;
  out.reserve(c.size());
  for (const auto& p : c) out.push_back(tokenize(derive_variant(p.body, v, mode), mode));
  return out;
}

// Throws DataError if any post is unlabeled.
inline std::vector<SentimentLabel> labels_of(const Corpus& c) {
  std::vector<SentimentLabel> y;
  y.reserve(c.size());
  for (const auto& p : c) {
    if (!p.label) throw DataError("post " + p.id + " has no label");
    y.push_back(*p.label);
  }
  return y;
}

// Logistic models read TF-IDF rows, Naive Bayes reads raw counts.
inline std::vector<SparseVector> featurize(const TfIdfModel& vec, ModelFamily family,
                                           std::span<const TokenSequence> docs) {
  if (family == ModelFamily::Logistic) return vec.transform_batch(docs);
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(vec.counts(d));
  return out;
}

inline LinearModel train_model(ModelFamily family, std::span<const SparseVector> X,
                               std::span<const SentimentLabel> y, const TrainConfig& cfg) {
  return family == ModelFamily::Logistic ? train_logistic(X, y, cfg) : train_multinomial_nb(X, y, cfg);
}

// A fitted vectorizer paired with the classifier trained on its output.
struct ClassifierBundle {
  DataVariant variant = DataVariant::TextAndEmoji;
  TokenizerMode mode = TokenizerMode::PaperRegex;
  TfIdfModel vectorizer;
  LinearModel model;

  std::vector<SparseVector> features(const Corpus& c) const {
    const auto docs = tokenize_corpus(c, variant, mode);
    return featurize(vectorizer, model.family, docs);
  }

  Predictions predict(const Corpus& c) const { return finmoji::predict(model, features(c)); }
};

inline ClassifierBundle fit_classifier(const Corpus& train, DataVariant variant, ModelFamily family,
                                       const TrainConfig& cfg = {}, TokenizerMode mode = TokenizerMode::PaperRegex) {
  ClassifierBundle b;
  b.variant = variant;
  b.mode = mode;
  const auto docs = tokenize_corpus(train, variant, mode);
  b.vectorizer = TfIdfModel::fit(docs);
  const auto X = featurize(b.vectorizer, family, docs);
  const auto y = labels_of(train);
  b.model = train_model(family, X, y, cfg);
  return b;
}

inline constexpr std::string_view kModelFormat = "finmoji-model";
inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json to_json(const ClassifierBundle& b) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelFormatVersion;
  j["formula_id"] = TfIdfModel::kFormulaId;
  j["variant"] = to_string(b.variant);
  j["tokenizer_mode"] = to_string(b.mode);
  j["unicode_version"] = unicode::kVersion;
  const auto model = to_json(b.model);
  for (const auto& [k, v] : model.items()) j[k] = v;
  j["vectorizer"] = b.vectorizer.to_json();
  return j;
}

template <typename Json>
ClassifierBundle bundle_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kModelFormat) throw DataError("not a finmoji model file");
  if (j.value("version", 0) != kModelFormatVersion) throw DataError("unsupported model file version");
  const auto formula = j.value("formula_id", std::string{});
  if (!j.contains("vectorizer") || formula != j.at("vectorizer").value("formula_id", std::string{}) ||
      formula != TfIdfModel::kFormulaId) {
    throw DataError("model and vectorizer formula ids do not match");
  }
  ClassifierBundle b;
  b.vectorizer = TfIdfModel::from_json(j.at("vectorizer"));
  b.model = linear_model_from_json(j);
  try {
    b.variant = parse_variant(j.at("variant").template get<std::string>());
    const auto mode = j.at("tokenizer_mode").template get<std::string>();
    if (mode == to_string(TokenizerMode::PaperRegex)) b.mode = TokenizerMode::PaperRegex;
    else if (mode == to_string(TokenizerMode::GraphemeEmoji)) b.mode = TokenizerMode::GraphemeEmoji;
    else throw DataError("unknown tokenizer mode " + mode);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  if (b.model.dim() != b.vectorizer.dim()) throw DataError("model weights do not match vectorizer dimension");
  return b;
}

// ---------------------------------------------------------------------------
// Learning curve

struct CurveRow {
  std::size_t size = 0;
  double accuracy = 0.0;
  double f1 = 0.0;  // macro
  std::size_t vocab_size = 0;
};

// For each size: seeded uniform subsample of `train`, vectorizer refit on
// the subsample, training, and evaluation on the fixed `test` corpus.
inline std::vector<CurveRow> learning_curve(const Corpus& train, const Corpus& test, std::span<const std::size_t> sizes,
                                            DataVariant variant, ModelFamily family, std::uint64_t seed,
                                            const TrainConfig& cfg = {},
                                            TokenizerMode mode = TokenizerMode::PaperRegex) {
  std::unordered_set<std::string_view> train_ids;
  for (const auto& p : train) train_ids.insert(p.id);
  for (const auto& p : test) {
    if (train_ids.contains(p.id)) throw DataError("learning_curve: test post " + p.id + " also in training corpus");
  }
  for (auto s : sizes) {
    if (s > train.size()) throw std::invalid_argument("learning_curve: size exceeds training corpus");
    if (s < 2) throw std::invalid_argument("learning_curve: size must be at least 2");
  }
  const auto truth = labels_of(test);
  const auto test_docs = tokenize_corpus(test, variant, mode);
  const auto train_docs = tokenize_corpus(train, variant, mode);
  const auto train_labels = labels_of(train);

  std::vector<CurveRow> rows;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::vector<std::size_t> idx(train.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(mix_seed(seed, k));
    shuffle(idx, rng);
    idx.resize(sizes[k]);
    std::sort(idx.begin(), idx.end());

    std::vector<TokenSequence> docs;
    std::vector<SentimentLabel> y;
    docs.reserve(idx.size());
    for (auto i : idx) docs.push_back(train_docs[i]), y.push_back(train_labels[i]);

    const auto vec = TfIdfModel::fit(docs);
    const auto X = featurize(vec, family, docs);
    const auto model = train_model(family, X, y, cfg);
    const auto pred = predict(model, featurize(vec, family, test_docs));
    const auto rep = evaluate(pred.labels, truth);
    rows.push_back({sizes[k], rep.accuracy, rep.macro.f1, vec.dim()});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Benchmark

struct TimingStats {
  std::vector<double> runs;  // seconds
  double min = 0.0;
  double median = 0.0;
};

inline TimingStats summarize_timings(std::vector<double> runs) {
  TimingStats t;
  t.runs = runs;
  if (runs.empty()) return t;
  std::sort(runs.begin(), runs.end());
  t.min = runs.front();
  const auto m = runs.size() / 2;
  t.median = runs.size() % 2 ? runs[m] : (runs[m - 1] + runs[m]) / 2.0;
  return t;
}

struct BenchmarkResult {
  ModelFamily family = ModelFamily::Logistic;
  DataVariant variant = DataVariant::TextAndEmoji;
  std::size_t n_train = 0;
  std::size_t n_infer = 0;
  std::size_t vocab_size = 0;
  std::size_t train_nnz = 0;
  std::size_t infer_nnz = 0;
  TimingStats featurize_train_seconds;  // tokenize + fit + transform
  TimingStats train_seconds;            // optimizer only
  TimingStats featurize_infer_seconds;  // tokenize + transform
  TimingStats infer_seconds;            // prediction only
  double per_post_latency = 0.0;        // median infer_seconds / n_infer
};

// Wall-clock timings over `repeats` runs. Training and inference times
// exclude tokenization and vectorization, which are reported separately.
inline BenchmarkResult benchmark(ModelFamily family, DataVariant variant, const Corpus& train, const Corpus& infer,
                                 const TrainConfig& cfg = {}, std::size_t repeats = 5,
                                 TokenizerMode mode = TokenizerMode::PaperRegex) {
  if (repeats == 0) throw std::invalid_argument("benchmark: repeats must be positive");
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  BenchmarkResult r;
  r.family = family;
  r.variant = variant;
  r.n_train = train.size();
  r.n_infer = infer.size();
  const auto y = labels_of(train);

  std::vector<double> feat_train, fit, feat_infer, inf;
  for (std::size_t rep = 0; rep < repeats; ++rep) {
    auto t0 = clock::now();
    const auto docs = tokenize_corpus(train, variant, mode);
    const auto vec = TfIdfModel::fit(docs);
    const auto X = featurize(vec, family, docs);
    auto t1 = clock::now();
    const auto model = train_model(family, X, y, cfg);
    auto t2 = clock::now();
    feat_train.push_back(seconds(t0, t1));
    fit.push_back(seconds(t1, t2));

    if (infer.empty()) {
      feat_infer.push_back(0.0);
      inf.push_back(0.0);
    } else {
      auto t3 = clock::now();
      const auto Xi = featurize(vec, family, tokenize_corpus(infer, variant, mode));
      auto t4 = clock::now();
      const auto pred = predict(model, Xi);
      auto t5 = clock::now();
      feat_infer.push_back(seconds(t3, t4));
      inf.push_back(seconds(t4, t5));
      if (rep == 0) {
        for (const auto& x : Xi) r.infer_nnz += x.nnz();
      }
      (void)pred;
    }
    if (rep == 0) {
      r.vocab_size = vec.dim();
      for (const auto& x : X) r.train_nnz += x.nnz();
    }
  }
  r.featurize_train_seconds = summarize_timings(feat_train);
  r.train_seconds = summarize_timings(fit);
  r.featurize_infer_seconds = summarize_timings(feat_infer);
  r.infer_seconds = summarize_timings(inf);
  r.per_post_latency = r.n_infer ? r.infer_seconds.median / static_cast<double>(r.n_infer) : 0.0;
  return r;
}

inline nlohmann::ordered_json to_json(const TimingStats& t) {
  return {{"min", t.min}, {"median", t.median}, {"runs", t.runs}};
}

// Wall-clock values live under "timings".
inline nlohmann::ordered_json to_json(const BenchmarkResult& r) {
  nlohmann::ordered_json j;
  j["family"] = to_string(r.family);
  j["variant"] = to_string(r.variant);
  j["n_train"] = r.n_train;
  j["n_infer"] = r.n_infer;
  j["vocab_size"] = r.vocab_size;
  j["train_nnz"] = r.train_nnz;
  j["infer_nnz"] = r.infer_nnz;
  j["repeats"] = r.train_seconds.runs.size();
  j["timings"] = {{"featurize_train_seconds", to_json(r.featurize_train_seconds)},
                  {"train_seconds", to_json(r.train_seconds)},
                  {"featurize_infer_seconds", to_json(r.featurize_infer_seconds)},
                  {"infer_seconds", to_json(r.infer_seconds)},
                  {"per_post_latency_seconds", r.per_post_latency}};
  return j;
}

}  // namespace finmoji
