// Acceptance checks. Prints one PASS/FAIL line per criterion. Exits
// non-zero on any failure other than a criterion marked known unattainable.
// Tolerances and time budgets are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli_runner.hpp"
#include "finmoji.hpp"
#include "oracles.hpp"

using namespace finmoji;
namespace fs = std::filesystem;

namespace {

constexpr double kTfIdfTol = 1e-9;
constexpr double kGradTol = 1e-5;
constexpr double kNbTol = 1e-12;
constexpr double kRankTol = 1e-12;
constexpr double kEntropyTol = 1e-3;
constexpr double kSyntheticAccuracy = 0.90;
constexpr double kCurveSlack = 0.02;
constexpr double kBootstrapTol = 0.02;

constexpr auto kBull = SentimentLabel::Bullish;
constexpr auto kBear = SentimentLabel::Bearish;

struct Outcome {
  bool pass = true;
  std::string failures;
  std::ostringstream note;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    failures += (failures.empty() ? "" : "; ") + what;
    pass = false;
  }

  std::string summary() const { return failures.empty() ? note.str() : note.str() + " | failed: " + failures; }
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Outcome&)> body;
  bool known_unattainable = false;  // failure expected; see the check's comment
};

SparseVector dense(const std::vector<double>& values) {
  SparseVector v;
  v.dim = values.size();
  for (std::uint32_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) v.entries.push_back({i, values[i]});
  }
  return v;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

void tfidf_exactness(Outcome& o) {
  using Doc = std::vector<std::string>;
  const std::vector<Doc> docs = {{"a", "b"}, {"b", "b"}, {"c"}};
  const auto m = TfIdfModel::fit(docs);
  const auto ab = m.transform(Doc{"a", "b"});
  const auto c = m.transform(Doc{"c"});
  const double wa = ab.at(*m.index_of("a")).value_or(-1), wb = ab.at(*m.index_of("b")).value_or(-1);
  const double wc = c.at(*m.index_of("c")).value_or(-1);
  // hand values: 0.5 ln 4, 0.5 ln 2.5, ln 4
  o.check(std::abs(wa - 0.5 * std::log(4.0)) < kTfIdfTol, "w(a)=" + fmt(wa, 12));
  o.check(std::abs(wb - 0.5 * std::log(2.5)) < kTfIdfTol, "w(b)=" + fmt(wb, 12));
  o.check(std::abs(wc - std::log(4.0)) < kTfIdfTol, "w(c)=" + fmt(wc, 12));
  o.check(std::abs(wa - 0.693147) < 5e-7 && std::abs(wb - 0.458145) < 5e-7 && std::abs(wc - 1.386294) < 5e-7,
          "printed 6-decimal values");
  o.note << "w = " << fmt(wa, 9) << ", " << fmt(wb, 9) << ", " << fmt(wc, 9);
}

void gradient_check(Outcome& o) {
  Rng rng(7);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int problem = 0; problem < 20; ++problem) {
    const std::size_t dim = 1 + uniform_index(rng, 10), n = 1 + uniform_index(rng, 50);
    std::vector<SparseVector> X;
    std::vector<SentimentLabel> y;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(dim);
      for (auto& v : row) v = uniform_unit(rng) < 0.3 ? 0.0 : normal(rng);
      X.push_back(dense(row));
      y.push_back(uniform_unit(rng) < 0.5 ? kBull : kBear);
    }
    std::vector<double> w(dim);
    for (auto& v : w) v = normal(rng);
    const double b = normal(rng), lambda = 1.0;
    const auto obj = logistic_objective(X, y, w, b, lambda);
    std::vector<double> analytic = obj.grad_w, numeric;
    analytic.push_back(obj.grad_b);
    const double h = 1e-5;
    for (std::size_t k = 0; k <= dim; ++k) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (k < dim) wp[k] += h, wm[k] -= h;
      else bp += h, bm -= h;
      numeric.push_back((logistic_objective(X, y, wp, bp, lambda).value - logistic_objective(X, y, wm, bm, lambda).value) /
                        (2 * h));
    }
    double diff = 0, norm = 0;
    for (std::size_t k = 0; k <= dim; ++k) {
      diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
      norm += numeric[k] * numeric[k];
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12));
  }
  o.check(worst < kGradTol, "relative error " + fmt(worst));
  o.note << "worst relative error " << fmt(worst, 3) << " over 20 problems";
}

void nb_oracle(Outcome& o) {
  using Doc = std::vector<std::string>;
  struct Fixture {
    std::vector<Doc> docs;
    std::vector<bool> bull;
  };
  const std::vector<Fixture> fixtures = {
      {{{"up", "up", "buy"}, {"buy", "moon"}, {"down", "sell"}, {"sell", "up"}}, {true, true, false, false}},
      {{{"🚀"}, {"🚀", "🚀"}, {"🩸"}, {"🩸", "🚀"}, {"x"}, {"x", "🩸"}}, {true, true, false, false, true, false}},
      {{{"a"}, {"b"}, {"a", "b", "c"}}, {true, false, false}},
      {{{"p", "q", "q"}, {"q"}, {"p"}, {"r", "r", "r"}, {"p", "r"}}, {false, true, true, false, true}},
  };
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& f : fixtures) {
    std::vector<SentimentLabel> y;
    for (bool b : f.bull) y.push_back(b ? kBull : kBear);
    const auto vec = TfIdfModel::fit(f.docs);
    std::vector<SparseVector> counts;
    for (const auto& d : f.docs) counts.push_back(vec.counts(d));
    for (double alpha : {1.0, 0.5, 2.0}) {
      const auto m = train_multinomial_nb(counts, y, {.nb_alpha = alpha});
      std::vector<Doc> queries = f.docs;
      queries.push_back({"never-seen"});
      queries.push_back({});
      for (const auto& q : queries) {
        const double got = predict(m, std::vector<SparseVector>{vec.counts(q)}).probabilities[0];
        worst = std::max(worst, std::abs(got - oracle::nb_posterior(f.docs, f.bull, q, alpha)));
        ++checked;
      }
    }
  }
  o.check(worst <= kNbTol, "max |diff| " + fmt(worst));
  o.note << checked << " posteriors, max |diff| " << fmt(worst, 3);
}

void rank_oracles(Outcome& o) {
  const std::vector<std::vector<double>> samples = {
      {1}, {2, 4}, {1, 3}, {1, 1, 2}, {3, 5, 7}, {0.5, 2, 2, 9}, {2, 4, 4, 6, 8}, {1, 2, 3, 4, 5, 6}, {4, 4, 4, 4, 4, 4}, {6, 5, 4, 4, 1}};
  double worst_u = 0, worst_p = 0, worst_ks_p = 0;
  std::size_t d_mismatch = 0, pairs = 0;
  for (const auto& a : samples) {
    for (const auto& b : samples) {
      const auto mw = mann_whitney_u(a, b);
      const auto mw_ref = oracle::mann_whitney(a, b);
      worst_u = std::max(worst_u, std::abs(mw.statistic - mw_ref.statistic));
      worst_p = std::max(worst_p, std::abs(mw.p_value - mw_ref.p_value));
      o.check(mw.exact, "MWU not exact");
      const auto ks = ks_two_sample(a, b);
      const auto ks_ref = oracle::kolmogorov_smirnov(a, b);
      d_mismatch += ks.statistic != ks_ref.statistic;
      worst_ks_p = std::max(worst_ks_p, std::abs(ks.p_value - ks_ref.p_value));
      ++pairs;
    }
  }
  o.check(worst_u <= kRankTol, "U diff " + fmt(worst_u));
  o.check(worst_p <= kRankTol, "MWU p diff " + fmt(worst_p));
  o.check(d_mismatch == 0, std::to_string(d_mismatch) + " KS D mismatches");
  o.check(worst_ks_p <= kRankTol, "KS p diff " + fmt(worst_ks_p));
  o.note << pairs << " sample pairs; max |dU| " << worst_u << ", |dp| " << fmt(worst_p, 3) << ", KS D exact";
}

void chi_square_v(Outcome& o) {
  const auto perfect = chi_square({{20, 0}, {0, 20}});
  const double v1 = cramers_v(perfect.statistic, 40, 2, 2);
  const auto indep = chi_square({{10, 10}, {10, 10}});
  const double v0 = cramers_v(indep.statistic, 40, 2, 2);
  o.check(perfect.statistic == 40.0, "chi2=" + fmt(perfect.statistic, 17));
  o.check(v1 == 1.0, "V=" + fmt(v1, 17));
  o.check(indep.statistic == 0.0 && v0 == 0.0 && indep.p_value == 1.0, "independent table");
  o.note << "chi2 " << perfect.statistic << " V " << v1 << "; chi2 " << indep.statistic << " V " << v0 << " p "
         << indep.p_value;
}

// The stated target for the skewed fixture is 1.374 bits, but the entropy
// of (50, 30, 15)/95 is 1.43298 bits, and no reading of the top-mass rule
// (raw shares, nats, two-symbol prefix) gives 1.374. The criterion is
// checked as written and reported as a known failure.
constexpr double kStatedSkewedEntropy = 1.374;

void entropy_check(Outcome& o) {
  FrequencyDistribution uniform, skew;
  for (const char* s : {"a", "b", "c", "d"}) uniform.add(s, 25);
  skew.add("a", 50), skew.add("b", 30), skew.add("c", 15), skew.add("d", 5);
  const double hu = entropy_top_mass(uniform, 1.0).entropy_bits;
  const double hs = entropy_top_mass(skew, 0.9).entropy_bits;
  o.check(hu == 2.0, "uniform " + fmt(hu, 17));
  double h95 = 0.0;
  for (double c : {50.0, 30.0, 15.0}) h95 -= c / 95.0 * std::log2(c / 95.0);
  o.check(std::abs(hs - h95) <= 1e-12, "skewed " + fmt(hs) + " vs direct " + fmt(h95));
  o.check(std::abs(hs - kStatedSkewedEntropy) <= kEntropyTol,
          "skewed " + fmt(hs) + " bits, stated target 1.374 +/- 0.001 (direct H(50,30,15)/95 = " + fmt(h95) + ")");
  o.note << "uniform-4 " << hu << " bits; {50,30,15,5}@0.9 " << fmt(hs, 6) << " bits";
}

void lexicon_exactness(Outcome& o) {
  std::size_t cells = 0;
  for (std::uint64_t b = 1; b <= 5; ++b) {
    for (std::uint64_t r = 1; r <= 5; ++r) {
      std::vector<Post> posts;
      auto add = [&](std::string body, SentimentLabel l) {
        posts.push_back({.id = std::to_string(posts.size()), .body = std::move(body), .label = l});
      };
      for (std::uint64_t i = 0; i < b; ++i) add(i % 2 ? "🚀 up 🚀🚀" : "up 🚀", kBull);
      for (std::uint64_t i = 0; i < r; ++i) add(i % 3 ? "down 🚀 🚀" : "🚀 down", kBear);
      add("other 📉", kBear);
      const auto scores = single_scores(Corpus(posts, "grid"));
      const auto it = std::find_if(scores.begin(), scores.end(), [](const EmojiStats& s) { return s.emoji == "🚀"; });
      o.check(it != scores.end() && it->bullish_score == static_cast<double>(b) / static_cast<double>(b + r) &&
                  it->n_posts == b + r,
              "cell " + std::to_string(b) + "/" + std::to_string(r));
      ++cells;
    }
  }
  const auto pairs = pair_scores(Corpus({{.id = "1", .body = "🚀💎💎🚀", .label = kBull}}, "pair"));
  o.check(pairs.size() == 1 && pairs[0].n_posts == 1, "pair dedup");
  o.note << cells << " grid cells exact; 🚀💎💎🚀 -> " << (pairs.empty() ? 0 : pairs[0].n_posts) << " co-occurrence";
}

struct SyntheticSplit {
  Corpus train;  // 15,000 posts
  Corpus test;   // fixed 5,000 posts
};

const SyntheticSplit& synthetic_split() {
  static const SyntheticSplit s = [] {
    SyntheticConfig cfg;
    cfg.n_posts = 20000;
    cfg.label_noise = 0.05;
    cfg.seed = 20240601;
    const auto all = make_synthetic_corpus(cfg);
    std::vector<Post> train(all.begin(), all.begin() + 15000), test(all.begin() + 15000, all.end());
    return SyntheticSplit{Corpus(train, "synthetic[0:15000]"), Corpus(test, "synthetic[15000:20000]")};
  }();
  return s;
}

double median_train_plus_infer(const BenchmarkResult& r) {
  std::vector<double> runs;
  for (std::size_t i = 0; i < r.train_seconds.runs.size(); ++i) {
    runs.push_back(r.featurize_train_seconds.runs[i] + r.train_seconds.runs[i] + r.featurize_infer_seconds.runs[i] +
                   r.infer_seconds.runs[i]);
  }
  return summarize_timings(runs).median;
}

void synthetic_end_to_end(Outcome& o) {
  const auto& s = synthetic_split();
  const std::vector<Post> first(s.train.begin(), s.train.begin() + 1000);
  const Corpus train1k(first, "synthetic[0:1000]");
  const auto bundle = fit_classifier(train1k, DataVariant::EmojiOnly, ModelFamily::Logistic);
  const double acc = evaluate(bundle.predict(s.test).labels, labels_of(s.test)).accuracy;
  o.check(acc >= kSyntheticAccuracy, "accuracy " + fmt(acc));

  const auto emoji = benchmark(ModelFamily::Logistic, DataVariant::EmojiOnly, s.train, s.test, {}, 5);
  const auto both = benchmark(ModelFamily::Logistic, DataVariant::TextAndEmoji, s.train, s.test, {}, 5);
  const double te = median_train_plus_infer(emoji), tb = median_train_plus_infer(both);
  o.check(te < tb, "emoji-only " + fmt(te) + " s >= text+emoji " + fmt(tb) + " s");
  o.note << "emoji-only accuracy@1000 " << fmt(acc, 4) << "; train+infer median " << fmt(te, 3) << " s vs "
         << fmt(tb, 3) << " s (text+emoji)";
}

void curve_monotone(Outcome& o) {
  const auto& s = synthetic_split();
  const std::vector<std::size_t> sizes = {100, 10000};
  for (auto v : {DataVariant::TextOnly, DataVariant::EmojiOnly, DataVariant::TextAndEmoji}) {
    const auto rows = learning_curve(s.train, s.test, sizes, v, ModelFamily::Logistic, 42);
    o.check(rows[1].accuracy >= rows[0].accuracy - kCurveSlack, std::string(to_string(v)));
    o.note << to_string(v) << " " << fmt(rows[0].accuracy, 4) << "->" << fmt(rows[1].accuracy, 4) << "  ";
  }
}

void bootstrap_check(Outcome& o) {
  const std::vector<SentimentLabel> truth = {kBull, kBull, kBear, kBear};
  const std::vector<SentimentLabel> pred = {kBull, kBull, kBear, kBull};
  const auto a = bootstrap_ci(pred, truth, 1000, 42), b = bootstrap_ci(pred, truth, 1000, 42);
  o.check(to_json(a).dump() == to_json(b).dump(), "same seed differs");
  const auto dist = oracle::accuracy_distribution(4, 3);
  const double lo = oracle::discrete_quantile(dist, 0.025, 1000), hi = oracle::discrete_quantile(dist, 0.975, 1000);
  o.check(std::abs(a["accuracy"].lo - lo) <= kBootstrapTol, "lo " + fmt(a["accuracy"].lo) + " vs " + fmt(lo));
  o.check(std::abs(a["accuracy"].hi - hi) <= kBootstrapTol, "hi " + fmt(a["accuracy"].hi) + " vs " + fmt(hi));
  o.note << "accuracy CI [" << a["accuracy"].lo << ", " << a["accuracy"].hi << "] vs exact [" << lo << ", " << hi
         << "]";
}

void cross_domain(Outcome& o) {
  SyntheticConfig ca;
  ca.n_posts = 3000;
  ca.seed = 11;
  ca.id_prefix = "a";
  SyntheticConfig cb = ca;
  cb.seed = 12;
  cb.id_prefix = "b";
  cb.bullish_emoji = "🐂";
  cb.bearish_emoji = "🐻";
  cb.neutral_emojis = {"😀", "😃", "😄", "😁", "😆", "😅", "🤣", "😊", "😇", "🙂", "🙃", "😉", "😌", "😍",
                       "🥰", "😘", "😗", "😙", "😚", "😋"};
  cb.neutral_emoji_rate = 2.0;
  ca.neutral_emojis = {"👀", "🤔", "😂", "🔥", "💰", "📊", "🙏", "😎", "💎", "🙌", "📈", "📉", "🤑", "💸",
                       "🌙", "⭐", "🎯", "🧠", "🦍", "🍗"};
  ca.neutral_emoji_rate = 2.0;
  const auto a = make_synthetic_corpus(ca), b = make_synthetic_corpus(cb);
  const auto diff = compare_corpora(a, b, 20);
  const auto same = compare_corpora(a, a, 20);
  o.check(diff.cramers_v >= 0.9 && diff.chi_square.p_value < 0.01, "disjoint V " + fmt(diff.cramers_v));
  o.check(same.cramers_v <= 0.01 && same.chi_square.p_value >= 0.99, "identical V " + fmt(same.cramers_v));
  o.note << "disjoint V " << fmt(diff.cramers_v, 4) << " p " << fmt(diff.chi_square.p_value, 3) << "; identical V "
         << same.cramers_v << " p " << same.chi_square.p_value;
}

void cli_determinism(Outcome& o) {
  const auto dir = fs::temp_directory_path() / ("finmoji_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  auto p = [&](const std::string& n) { return (dir / n).string(); };
  auto must = [&](const std::vector<std::string>& args) {
    const auto r = clitest::run(args, dir / "io");
    if (r.exit_code != 0) throw std::runtime_error(args[0] + " exited " + std::to_string(r.exit_code) + ": " + r.err);
    return r;
  };
  must({"synth", "--n", "2000", "--seed", "5", "-o", p("raw.jsonl")});
  must({"synth", "--n", "1000", "--seed", "6", "--id-prefix", "o", "-o", p("other.jsonl")});
  std::ofstream(p("prices.csv")) << "date,close\n2021-01-01,10\n2021-01-02,12\n2021-01-03,11\n2021-01-04,15\n";
  must({"prepare", "-i", p("raw.jsonl"), "-o", p("prep")});

  struct Cmd {
    std::vector<std::string> args;
    std::vector<std::string> files;  // outputs compared byte-for-byte (JSON with timings stripped)
  };
  const std::vector<Cmd> cmds = {
      {{"prepare", "-i", p("raw.jsonl"), "-o", p("out/prep")}, {"out/prep/train.jsonl", "out/prep/test.jsonl"}},
      {{"train", "--train", p("prep/train.jsonl"), "--model-out", p("out/model.json")}, {"out/model.json"}},
      {{"eval", "--model-in", p("out/model.json"), "--test", p("prep/test.jsonl"), "--csv", p("out/eval.csv")},
       {"out/eval.csv"}},
      {{"lexicon", "-i", p("raw.jsonl"), "--pairs", "--buckets", "--out-dir", p("out/lex")},
       {"out/lex/lexicon.json", "out/lex/singles.csv", "out/lex/pairs.csv", "out/lex/buckets.csv"}},
      {{"compare", p("raw.jsonl"), p("other.jsonl"), "--rank-csv", p("out/rank.csv")}, {"out/rank.csv"}},
      {{"curve", "--train", p("prep/train.jsonl"), "--test", p("prep/test.jsonl"), "--sizes", "100,1000", "--csv",
        p("out/curve.csv")},
       {"out/curve.csv"}},
      {{"bench", "--train", p("prep/train.jsonl"), "--infer", p("prep/test.jsonl"), "--repeats", "2"}, {}},
      {{"entropy", "-i", p("raw.jsonl")}, {}},
      {{"index", "-i", p("raw.jsonl"), "--prices", p("prices.csv"), "--csv", p("out/index.csv")}, {"out/index.csv"}},
      {{"synth", "--n", "500", "-o", p("out/synth.jsonl")}, {"out/synth.jsonl"}},
  };
  auto normalize = [&](const std::string& rel) {
    const auto text = clitest::slurp(dir / rel);
    return rel.ends_with(".json") ? clitest::payload(text) : text;
  };
  std::size_t compared = 0;
  for (const auto& c : cmds) {
    const auto first = must(c.args);
    std::vector<std::string> files;
    for (const auto& f : c.files) files.push_back(normalize(f));
    const auto second = must(c.args);
    o.check(clitest::payload(first.out) == clitest::payload(second.out), c.args[0] + " stdout");
    for (std::size_t i = 0; i < files.size(); ++i) o.check(files[i] == normalize(c.files[i]), c.files[i]);
    compared += 1 + files.size();
  }
  fs::remove_all(dir);
  o.note << cmds.size() << " subcommands, " << compared << " outputs identical across runs";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "TF-IDF exactness", 1.0, tfidf_exactness},
      {2, "logistic gradient check", 5.0, gradient_check},
      {3, "Naive Bayes oracle", 1.0, nb_oracle},
      {4, "rank-test oracles", 10.0, rank_oracles},
      {5, "chi-square and Cramer's V", 1.0, chi_square_v},
      {6, "entropy", 1.0, entropy_check, true},
      {7, "lexicon exactness", 1.0, lexicon_exactness},
      {8, "synthetic end-to-end", 60.0, synthetic_end_to_end},
      {9, "learning-curve monotonicity", 60.0, curve_monotone},
      {10, "bootstrap CI determinism", 5.0, bootstrap_check},
      {11, "cross-domain comparison", 10.0, cross_domain},
      {12, "CLI determinism", 120.0, cli_determinism},
  };
  int failed = 0, unexpected = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs < c.budget_seconds, "runtime " + fmt(secs, 3) + " s over " + fmt(c.budget_seconds) + " s budget");
    failed += !o.pass;
    unexpected += !o.pass && !c.known_unattainable;
    std::printf("%s %2d %-28s %7.3fs  %s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.summary().c_str(),
                !o.pass && c.known_unattainable ? " [known unattainable]" : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed, %d known unattainable, %d unexpected failures\n",
              static_cast<int>(criteria.size()) - failed, criteria.size(), failed - unexpected, unexpected);
  return unexpected == 0 ? 0 : 1;
}
