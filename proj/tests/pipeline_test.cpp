#include <gtest/gtest.h>

#include "finmoji/pipeline.hpp"
#include "finmoji/synthetic.hpp"

using namespace finmoji;

namespace {

Corpus synthetic(std::size_t n, std::uint64_t seed, const std::string& prefix) {
  SyntheticConfig cfg;
  cfg.n_posts = n;
  cfg.seed = seed;
  cfg.id_prefix = prefix;
  return make_synthetic_corpus(cfg);
}

}  // namespace

TEST(Synthetic, DeterministicAndLabeled) {
  const auto a = synthetic(500, 5, "s"), b = synthetic(500, 5, "s");
  EXPECT_EQ(a.posts(), b.posts());
  EXPECT_NE(a.posts(), synthetic(500, 6, "s").posts());
  std::size_t agree = 0;
  for (const auto& p : a) {
    ASSERT_TRUE(p.label.has_value());
    ASSERT_TRUE(p.created_at.has_value());
    const auto e = extract_emojis(p.body);
    const bool rocket = std::find(e.begin(), e.end(), "🚀") != e.end();
    agree += rocket == (*p.label == SentimentLabel::Bullish);
  }
  EXPECT_GT(agree, 450u);  // 5% label noise
}

TEST(Pipeline, CurveAtFullSizeEqualsDirectRun) {
  const auto train = synthetic(300, 1, "tr"), test = synthetic(200, 2, "te");
  const std::vector<std::size_t> sizes = {train.size()};
  for (auto family : {ModelFamily::Logistic, ModelFamily::MultinomialNB}) {
    const auto rows = learning_curve(train, test, sizes, DataVariant::TextAndEmoji, family, 9);
    const auto bundle = fit_classifier(train, DataVariant::TextAndEmoji, family);
    const auto rep = evaluate(bundle.predict(test).labels, labels_of(test));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].accuracy, rep.accuracy);
    EXPECT_EQ(rows[0].vocab_size, bundle.vectorizer.dim());
  }
}

TEST(Pipeline, CurveDoesNotDegrade) {
  const auto train = synthetic(2000, 3, "tr"), test = synthetic(1000, 4, "te");
  const std::vector<std::size_t> sizes = {100, 1000};
  const auto rows = learning_curve(train, test, sizes, DataVariant::EmojiOnly, ModelFamily::Logistic, 1);
  EXPECT_GE(rows[1].accuracy, rows[0].accuracy - 0.02);
  EXPECT_THROW(learning_curve(train, train, sizes, DataVariant::EmojiOnly, ModelFamily::Logistic, 1), DataError);
}

TEST(Pipeline, BundleJsonRoundTrip) {
  const auto train = synthetic(200, 1, "tr");
  const auto bundle = fit_classifier(train, DataVariant::EmojiOnly, ModelFamily::Logistic);
  const auto text = to_json(bundle).dump();
  const auto back = bundle_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(to_json(back).dump(), text);
  EXPECT_EQ(to_json(fit_classifier(train, DataVariant::EmojiOnly, ModelFamily::Logistic)).dump(), text);

  auto bad = nlohmann::json::parse(text);
  bad["vectorizer"]["formula_id"] = "other";
  EXPECT_THROW(bundle_from_json(bad), DataError);
  bad = nlohmann::json::parse(text);
  bad["weights"].push_back(0.0);
  EXPECT_THROW(bundle_from_json(bad), DataError);
}

TEST(Pipeline, EmojiOnlyUsesFewerFeatures) {
  const auto train = synthetic(1000, 1, "tr"), test = synthetic(500, 2, "te");
  const auto e = benchmark(ModelFamily::Logistic, DataVariant::EmojiOnly, train, test, {}, 1);
  const auto t = benchmark(ModelFamily::Logistic, DataVariant::TextAndEmoji, train, test, {}, 1);
  EXPECT_LT(e.infer_nnz, t.infer_nnz);
  EXPECT_LT(e.vocab_size, t.vocab_size);
  const auto none = benchmark(ModelFamily::Logistic, DataVariant::EmojiOnly, train, Corpus{}, {}, 2);
  EXPECT_EQ(none.infer_seconds.median, 0.0);
  EXPECT_EQ(none.infer_seconds.runs.size(), 2u);
}
