// finmoji command-line tool: every subcommand prints one JSON document on
// stdout; diagnostics go to stderr.
//
// Exit codes: 0 success, 2 usage, 3 data error, 4 numeric failure.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "finmoji.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace finmoji::cli {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// ---------------------------------------------------------------------------
// Output helpers

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + "\"";
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string> header) { row(std::vector<std::string>(header)); }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) text_ += (i ? "," : "") + csv_field(fields[i]);
    text_ += "\n";
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

// ---------------------------------------------------------------------------
// Shared options

struct Common {
  std::uint64_t seed = 42;
  std::string mode = "paper";
};

TokenizerMode parse_mode(const std::string& s) {
  return s == "grapheme" ? TokenizerMode::GraphemeEmoji : TokenizerMode::PaperRegex;
}

LoadResult load(const std::string& path, const std::string& format, RunManifest& manifest) {
  manifest.add_input(path);
  if (format == "jsonl") return load_posts(path, InputFormat::Jsonl);
  if (format == "csv") return load_posts(path, InputFormat::Csv);
  return load_posts(path);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--mode", c.mode, "Tokenizer mode")
      ->check(CLI::IsMember({"paper", "grapheme"}))
      ->capture_default_str();
}

TrainConfig train_config(CLI::App* sub, TrainConfig& cfg) {
  sub->add_option("--l2", cfg.l2_lambda, "L2 penalty")->capture_default_str();
  sub->add_option("--max-iters", cfg.max_iters, "Optimizer iteration cap")->capture_default_str();
  sub->add_option("--tol", cfg.tol, "Gradient-norm tolerance")->capture_default_str();
  sub->add_option("--nb-alpha", cfg.nb_alpha, "Naive Bayes Laplace smoothing")->capture_default_str();
  return cfg;
}

ordered_json config_json(const TrainConfig& cfg) {
  return {{"l2_lambda", cfg.l2_lambda}, {"max_iters", cfg.max_iters}, {"tol", cfg.tol}, {"nb_alpha", cfg.nb_alpha}};
}

ordered_json label_json(const LabelCounts& n) {
  return {{"bullish", n.bullish}, {"bearish", n.bearish}, {"unlabeled", n.unlabeled}};
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareOptions {
  std::string input, format = "auto", out, variant = "text_emoji";
  bool balance = true;
  double test_fraction = 0.2;
};

ordered_json run_prepare(const PrepareOptions& o, const Common& c, RunManifest& m) {
  const auto mode = parse_mode(c.mode);
  const auto variant = parse_variant(o.variant);
  m.set_parameter("balance", o.balance);
  m.set_parameter("test_fraction", o.test_fraction);
  m.set_parameter("variant", to_string(variant));

  auto loaded = load(o.input, o.format, m);
  const auto emoji = filter_emoji_posts(loaded.corpus, mode);
  const auto labeled = filter_labeled(emoji);
  const auto balanced = o.balance ? balance_undersample(labeled, c.seed) : labeled;
  const auto parts = split(balanced, o.test_fraction, c.seed);
  const auto train = project(parts.train, variant, mode);
  const auto test = project(parts.test, variant, mode);

  const fs::path dir(o.out);
  std::ostringstream tr, te;
  write_jsonl(train, tr);
  write_jsonl(test, te);
  write_text(dir / "train.jsonl", tr.str());
  write_text(dir / "test.jsonl", te.str());

  ordered_json j;
  j["counts"] = {{"loaded", loaded.corpus.size()},
                 {"skipped_malformed", loaded.skipped},
                 {"with_emoji", emoji.size()},
                 {"labeled", labeled.size()},
                 {"balanced", balanced.size()},
                 {"train", label_json(count_labels(train))},
                 {"test", label_json(count_labels(test))}};
  j["files"] = {(dir / "train.jsonl").string(), (dir / "test.jsonl").string()};
  j["provenance"] = {{"train", train.provenance()}, {"test", test.provenance()}};
  return j;
}

// ---------------------------------------------------------------------------
// train / eval

struct TrainOptions {
  std::string train, format = "auto", family = "logistic", variant = "text_emoji", model_out;
  double threshold = 0.5;
  TrainConfig cfg;
};

ordered_json run_train(const TrainOptions& o, const Common& c, RunManifest& m) {
  auto cfg = o.cfg;
  cfg.seed = c.seed;
  const auto family = parse_family(o.family);
  const auto variant = parse_variant(o.variant);
  m.set_parameter("family", to_string(family));
  m.set_parameter("variant", to_string(variant));
  m.set_parameter("threshold", o.threshold);
  m.set_parameter("train_config", config_json(cfg));

  const auto corpus = load(o.train, o.format, m).corpus;
  const auto t0 = std::chrono::steady_clock::now();
  auto bundle = fit_classifier(corpus, variant, family, cfg, parse_mode(c.mode));
  m.set_timing("fit_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  bundle.model.threshold = o.threshold;

  auto model_json = to_json(bundle);
  model_json["manifest"] = m.to_json();
  write_json(o.model_out, model_json);

  ordered_json j;
  j["model_file"] = o.model_out;
  j["family"] = to_string(family);
  j["variant"] = to_string(variant);
  j["n_train"] = corpus.size();
  j["vocab_size"] = bundle.vectorizer.dim();
  j["threshold"] = bundle.model.threshold;
  j["training"] = to_json(bundle.model)["training"];
  return j;
}

struct EvalOptions {
  std::string model_in, test, format = "auto", variant, csv;
  std::optional<double> threshold;
  std::size_t bootstrap = 1000;
};

ordered_json run_eval(const EvalOptions& o, const Common& c, RunManifest& m) {
  m.add_input(o.model_in);
  std::ifstream in(o.model_in);
  if (!in) throw DataError("cannot read " + o.model_in);
  const auto model_json = nlohmann::json::parse(in, nullptr, false);
  if (model_json.is_discarded()) throw DataError(o.model_in + ": not valid JSON");
  auto bundle = bundle_from_json(model_json);
  if (!o.variant.empty() && parse_variant(o.variant) != bundle.variant) {
    throw DataError("model was trained on variant " + std::string(to_string(bundle.variant)));
  }
  if (parse_mode(c.mode) != bundle.mode) {
    throw DataError("model was trained with tokenizer mode " + std::string(to_string(bundle.mode)));
  }
  if (o.threshold) bundle.model.threshold = *o.threshold;
  m.set_parameter("threshold", bundle.model.threshold);
  m.set_parameter("variant", to_string(bundle.variant));
  m.set_parameter("bootstrap", o.bootstrap);

  const auto test = load(o.test, o.format, m).corpus;
  const auto truth = labels_of(test);
  const auto t0 = std::chrono::steady_clock::now();
  const auto pred = bundle.predict(test);
  m.set_timing("predict_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  const auto report = evaluate(pred.labels, truth);

  ordered_json j;
  j["family"] = to_string(bundle.model.family);
  j["variant"] = to_string(bundle.variant);
  j["threshold"] = bundle.model.threshold;
  j["n_test"] = test.size();
  j["report"] = to_json(report);
  std::optional<BootstrapCI> ci;
  if (o.bootstrap > 0) {
    ci = bootstrap_ci(pred.labels, truth, o.bootstrap, c.seed);
    j["bootstrap"] = to_json(*ci);
  }

  if (!o.csv.empty()) {
    CsvWriter w{"metric", "value", "ci_lo", "ci_hi"};
    const auto values = metric_values(report);
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      const std::string name(kMetricNames[k]);
      w.row({name, num(values[k]), ci ? num((*ci)[name].lo) : "", ci ? num((*ci)[name].hi) : ""});
    }
    write_text(o.csv, w.str());
  }
  return j;
}

// ---------------------------------------------------------------------------
// lexicon

struct LexiconOptions {
  std::string input, format = "auto", out_dir, eval_on, policy = "mean";
  std::size_t top_k = 50;
  bool pairs = false, buckets = false;
};

ordered_json run_lexicon(const LexiconOptions& o, const Common& c, RunManifest& m) {
  const auto mode = parse_mode(c.mode);
  m.set_parameter("top_k", o.top_k);
  m.set_parameter("pairs", o.pairs);
  m.set_parameter("buckets", o.buckets);
  const auto corpus = load(o.input, o.format, m).corpus;
  const auto lex = build_lexicon(corpus, o.top_k, o.pairs, mode);

  ordered_json j;
  j["lexicon"] = to_json(lex);
  std::vector<CountBucket> buckets;
  if (o.buckets) {
    buckets = count_buckets(corpus, mode);
    j["buckets"] = ordered_json::array();
    for (const auto& b : buckets) j["buckets"].push_back(to_json(b));
  }

  if (!o.eval_on.empty()) {
    const auto policy = o.policy == "pairs" ? LexiconPolicy::PairAware : LexiconPolicy::MeanOfSingles;
    m.set_parameter("policy", o.policy);
    const auto test = load(o.eval_on, "auto", m).corpus;
    std::vector<SentimentLabel> pred, truth;
    std::size_t abstained = 0;
    for (const auto& p : test) {
      if (!p.label) continue;
      const auto v = classify_with_lexicon(p, lex, policy, mode);
      if (v == LexiconVerdict::Abstain) {
        ++abstained;
        continue;
      }
      pred.push_back(v == LexiconVerdict::Bullish ? SentimentLabel::Bullish : SentimentLabel::Bearish);
      truth.push_back(*p.label);
    }
    ordered_json e{{"policy", o.policy}, {"abstained", abstained}, {"decided", pred.size()}};
    if (!pred.empty()) e["report"] = to_json(evaluate(pred, truth));
    j["classification"] = std::move(e);
  }

  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    write_json(dir / "lexicon.json", j["lexicon"]);
    CsvWriter singles{"rank", "emoji", "code_points", "n_posts", "n_bullish", "n_bearish", "bullish_score", "bearish_score"};
    for (std::size_t i = 0; i < lex.singles.size(); ++i) {
      const auto& s = lex.singles[i];
      std::string cps;
      for (const auto& cp : code_point_list(s.emoji)) cps += (cps.empty() ? "" : " ") + cp.get<std::string>();
      singles.row({std::to_string(i + 1), s.emoji, cps, std::to_string(s.n_posts), std::to_string(s.n_bullish),
                   std::to_string(s.n_bearish), num(s.bullish_score), num(s.bearish_score)});
    }
    write_text(dir / "singles.csv", singles.str());
    if (o.pairs) {
      CsvWriter pairs{"rank", "emoji_a", "emoji_b", "n_posts", "n_bullish", "n_bearish", "bullish_score", "bearish_score"};
      for (std::size_t i = 0; i < lex.pairs.size(); ++i) {
        const auto& p = lex.pairs[i];
        pairs.row({std::to_string(i + 1), p.first, p.second, std::to_string(p.n_posts), std::to_string(p.n_bullish),
                   std::to_string(p.n_bearish), num(p.bullish_score), num(p.bearish_score)});
      }
      write_text(dir / "pairs.csv", pairs.str());
    }
    if (o.buckets) {
      CsvWriter w{"unique_emojis", "n_posts", "n_bullish", "n_bearish", "bullish_fraction", "bearish_fraction"};
      for (const auto& b : buckets) {
        w.row({b.unique_count, std::to_string(b.n_posts), std::to_string(b.n_bullish), std::to_string(b.n_bearish),
               num(b.bullish_fraction), num(b.bearish_fraction)});
      }
      write_text(dir / "buckets.csv", w.str());
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  std::string corpus_a, corpus_b, format = "auto", test_input = "freq", rank_csv;
  std::size_t top = 20;
};

ordered_json run_compare(const CompareOptions& o, const Common& c, RunManifest& m) {
  m.set_parameter("top", o.top);
  m.set_parameter("test_input", o.test_input);
  const auto a = load(o.corpus_a, o.format, m).corpus;
  const auto b = load(o.corpus_b, o.format, m).corpus;
  const auto input = o.test_input == "posts" ? RankTestInput::PostEmojiCounts : RankTestInput::FrequencyVector;
  const auto report = compare_corpora(a, b, o.top, input, parse_mode(c.mode));
  if (!o.rank_csv.empty()) {
    CsvWriter w{"emoji", "rank_a", "rank_b", "rel_freq_a", "rel_freq_b"};
    for (const auto& r : report.rank_table) {
      w.row({r.emoji, num(r.rank_a), r.rank_b ? num(*r.rank_b) : "", num(r.rel_freq_a), num(r.rel_freq_b)});
    }
    write_text(o.rank_csv, w.str());
  }
  return to_json(report);
}

// ---------------------------------------------------------------------------
// curve / bench

struct CurveOptions {
  std::string train, test, format = "auto", family = "logistic", variant = "text_emoji", csv;
  std::vector<std::size_t> sizes = {100, 1000, 10000, 100000, 400000};
  TrainConfig cfg;
};

ordered_json run_curve(const CurveOptions& o, const Common& c, RunManifest& m) {
  auto cfg = o.cfg;
  cfg.seed = c.seed;
  const auto family = parse_family(o.family);
  const auto variant = parse_variant(o.variant);
  m.set_parameter("family", to_string(family));
  m.set_parameter("variant", to_string(variant));
  m.set_parameter("sizes", o.sizes);
  m.set_parameter("train_config", config_json(cfg));
  const auto train = load(o.train, o.format, m).corpus;
  const auto test = load(o.test, o.format, m).corpus;
  const auto rows = learning_curve(train, test, o.sizes, variant, family, c.seed, cfg, parse_mode(c.mode));

  ordered_json j;
  j["family"] = to_string(family);
  j["variant"] = to_string(variant);
  j["n_test"] = test.size();
  j["rows"] = ordered_json::array();
  CsvWriter w{"size", "accuracy", "f1", "vocab_size"};
  for (const auto& r : rows) {
    j["rows"].push_back({{"size", r.size}, {"accuracy", r.accuracy}, {"f1", r.f1}, {"vocab_size", r.vocab_size}});
    w.row({std::to_string(r.size), num(r.accuracy), num(r.f1), std::to_string(r.vocab_size)});
  }
  if (!o.csv.empty()) write_text(o.csv, w.str());
  return j;
}

struct BenchOptions {
  std::string train, infer, format = "auto", family = "logistic", variant = "text_emoji";
  std::size_t repeats = 5;
  TrainConfig cfg;
};

ordered_json run_bench(const BenchOptions& o, const Common& c, RunManifest& m) {
  auto cfg = o.cfg;
  cfg.seed = c.seed;
  const auto family = parse_family(o.family);
  const auto variant = parse_variant(o.variant);
  m.set_parameter("family", to_string(family));
  m.set_parameter("variant", to_string(variant));
  m.set_parameter("repeats", o.repeats);
  m.set_parameter("train_config", config_json(cfg));
  const auto train = load(o.train, o.format, m).corpus;
  const auto infer = load(o.infer, o.format, m).corpus;
  return to_json(benchmark(family, variant, train, infer, cfg, o.repeats, parse_mode(c.mode)));
}

// ---------------------------------------------------------------------------
// entropy

struct EntropyOptions {
  std::string input, format = "auto";
  double mass = 0.9;
  bool no_renormalize = false;
};

ordered_json run_entropy(const EntropyOptions& o, const Common& c, RunManifest& m) {
  const auto mode = parse_mode(c.mode);
  m.set_parameter("mass", o.mass);
  m.set_parameter("renormalize", !o.no_renormalize);
  const auto corpus = load(o.input, o.format, m).corpus;
  ordered_json j;
  const auto words = occurrence_frequencies(corpus, TokenKind::Word, mode);
  const auto emojis = occurrence_frequencies(corpus, TokenKind::Emoji, mode);
  j["words"] = words.total ? to_json(entropy_top_mass(words, o.mass, !o.no_renormalize)) : ordered_json(nullptr);
  j["emojis"] = emojis.total ? to_json(entropy_top_mass(emojis, o.mass, !o.no_renormalize)) : ordered_json(nullptr);
  if (!words.total && !emojis.total) throw NumericError("entropy: corpus has no word or emoji tokens");
  return j;
}

// ---------------------------------------------------------------------------
// index

struct IndexOptions {
  std::string input, format = "auto", emoji = "🚀", prices, csv;
};

DailySeries read_price_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  DailySeries s;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    std::string date = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) continue;  // header or junk
    if (date.size() > 10) {
      const auto t = parse_rfc3339(date);
      if (!t) continue;
      date = utc_date(*t);
    }
    if (date.size() != 10) continue;
    s[date] = v;
  }
  if (s.empty()) throw DataError(path + ": no (date,value) rows");
  return s;
}

ordered_json run_index(const IndexOptions& o, const Common& c, RunManifest& m) {
  m.set_parameter("emoji", o.emoji);
  const auto corpus = load(o.input, o.format, m).corpus;
  const auto series = emoji_index(corpus, o.emoji, parse_mode(c.mode));
  ordered_json j;
  j["emoji"] = o.emoji;
  j["series"] = ordered_json::array();
  CsvWriter w{"date", "ratio"};
  for (const auto& [day, ratio] : series) {
    j["series"].push_back({{"date", day}, {"ratio", ratio}});
    w.row({day, num(ratio)});
  }
  if (!o.csv.empty()) write_text(o.csv, w.str());
  if (!o.prices.empty()) {
    m.add_input(o.prices);
    const auto prices = read_price_csv(o.prices);
    ordered_json corr;
    corr["levels"] = pearson_corr(series, prices);
    const auto [da, db] = aligned_changes(series, prices);
    corr["changes"] = pearson_corr(da, db);
    j["correlation"] = std::move(corr);
  }
  return j;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string out;
  SyntheticConfig cfg;
};

ordered_json run_synth(SynthOptions o, const Common& c, RunManifest& m) {
  o.cfg.seed = c.seed;
  m.set_parameter("n_posts", o.cfg.n_posts);
  m.set_parameter("label_noise", o.cfg.label_noise);
  m.set_parameter("text_signal", o.cfg.text_signal);
  const auto corpus = make_synthetic_corpus(o.cfg);
  std::ostringstream os;
  write_jsonl(corpus, os);
  write_text(o.out, os.str());
  return {{"file", o.out}, {"n_posts", corpus.size()}, {"labels", label_json(count_labels(corpus))}};
}

}  // namespace
}  // namespace finmoji::cli

int main(int argc, char** argv) {
  using namespace finmoji;
  using namespace finmoji::cli;

  CLI::App app{"Emoji-aware financial sentiment toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");
  app.set_version_flag("--version", kToolVersion);

  Common common;
  std::function<ordered_json(RunManifest&)> action;
  std::string command;

  auto sub = [&](const char* name, const char* desc) {
    auto* s = app.add_subcommand(name, desc);
    add_common(s, common);
    return s;
  };

  PrepareOptions prep;
  {
    auto* s = sub("prepare", "Filter, balance and split a raw post dataset");
    s->add_option("--input,-i", prep.input, "JSONL or CSV posts")->required()->check(CLI::ExistingFile);
    s->add_option("--format", prep.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_flag("--balance,!--no-balance", prep.balance, "Undersample the majority class")->capture_default_str();
    s->add_option("--test-fraction", prep.test_fraction)->capture_default_str();
    s->add_option("--variant", prep.variant)->check(CLI::IsMember({"text", "emoji", "text_emoji"}))->capture_default_str();
    s->add_option("--out,-o", prep.out, "Output directory")->required();
    s->callback([&] { command = "prepare"; action = [&](RunManifest& m) { return run_prepare(prep, common, m); }; });
  }

  TrainOptions train;
  {
    auto* s = sub("train", "Fit vectorizer and classifier");
    s->add_option("--train", train.train)->required()->check(CLI::ExistingFile);
    s->add_option("--format", train.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--family", train.family)->check(CLI::IsMember({"logistic", "nb"}))->capture_default_str();
    s->add_option("--variant", train.variant)->check(CLI::IsMember({"text", "emoji", "text_emoji"}))->capture_default_str();
    s->add_option("--threshold", train.threshold)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    s->add_option("--model-out", train.model_out)->required();
    train_config(s, train.cfg);
    s->callback([&] { command = "train"; action = [&](RunManifest& m) { return run_train(train, common, m); }; });
  }

  EvalOptions eval;
  {
    auto* s = sub("eval", "Evaluate a model file with bootstrap confidence intervals");
    s->add_option("--model-in", eval.model_in)->required()->check(CLI::ExistingFile);
    s->add_option("--test", eval.test)->required()->check(CLI::ExistingFile);
    s->add_option("--format", eval.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--variant", eval.variant, "Expected variant; must match the model");
    s->add_option("--threshold", eval.threshold, "Override the stored decision threshold");
    s->add_option("--bootstrap", eval.bootstrap, "Bootstrap resamples (0 disables)")->capture_default_str();
    s->add_option("--csv", eval.csv, "Also write metrics as CSV");
    s->callback([&] { command = "eval"; action = [&](RunManifest& m) { return run_eval(eval, common, m); }; });
  }

  LexiconOptions lex;
  {
    auto* s = sub("lexicon", "Emoji and emoji-pair sentiment scores");
    s->add_option("--input,-i", lex.input)->required()->check(CLI::ExistingFile);
    s->add_option("--format", lex.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--top-k", lex.top_k)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_flag("--pairs", lex.pairs, "Include emoji pairs");
    s->add_flag("--buckets", lex.buckets, "Include unique-emoji-count buckets");
    s->add_option("--out-dir", lex.out_dir, "Write lexicon.json and CSV tables here");
    s->add_option("--eval-on", lex.eval_on, "Classify this labeled corpus with the lexicon")->check(CLI::ExistingFile);
    s->add_option("--policy", lex.policy)->check(CLI::IsMember({"mean", "pairs"}))->capture_default_str();
    s->callback([&] { command = "lexicon"; action = [&](RunManifest& m) { return run_lexicon(lex, common, m); }; });
  }

  CompareOptions cmp;
  {
    auto* s = sub("compare", "Compare emoji usage between two corpora");
    s->add_option("corpus_a", cmp.corpus_a)->required()->check(CLI::ExistingFile);
    s->add_option("corpus_b", cmp.corpus_b)->required()->check(CLI::ExistingFile);
    s->add_option("--format", cmp.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--top", cmp.top)->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--test-input", cmp.test_input, "freq: relative-frequency vectors; posts: emojis per post")
        ->check(CLI::IsMember({"freq", "posts"}))
        ->capture_default_str();
    s->add_option("--rank-csv", cmp.rank_csv, "Write the rank table as CSV");
    s->callback([&] { command = "compare"; action = [&](RunManifest& m) { return run_compare(cmp, common, m); }; });
  }

  CurveOptions curve;
  {
    auto* s = sub("curve", "Accuracy as a function of training-set size");
    s->add_option("--train", curve.train)->required()->check(CLI::ExistingFile);
    s->add_option("--test", curve.test)->required()->check(CLI::ExistingFile);
    s->add_option("--format", curve.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--sizes", curve.sizes)->delimiter(',')->capture_default_str();
    s->add_option("--family", curve.family)->check(CLI::IsMember({"logistic", "nb"}))->capture_default_str();
    s->add_option("--variant", curve.variant)->check(CLI::IsMember({"text", "emoji", "text_emoji"}))->capture_default_str();
    s->add_option("--csv", curve.csv, "Also write rows as CSV");
    train_config(s, curve.cfg);
    s->callback([&] { command = "curve"; action = [&](RunManifest& m) { return run_curve(curve, common, m); }; });
  }

  BenchOptions bench;
  {
    auto* s = sub("bench", "Training and inference wall-clock timings");
    s->add_option("--train", bench.train)->required()->check(CLI::ExistingFile);
    s->add_option("--infer", bench.infer)->required()->check(CLI::ExistingFile);
    s->add_option("--format", bench.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--family", bench.family)->check(CLI::IsMember({"logistic", "nb"}))->capture_default_str();
    s->add_option("--variant", bench.variant)->check(CLI::IsMember({"text", "emoji", "text_emoji"}))->capture_default_str();
    s->add_option("--repeats", bench.repeats)->check(CLI::PositiveNumber)->capture_default_str();
    train_config(s, bench.cfg);
    s->callback([&] { command = "bench"; action = [&](RunManifest& m) { return run_bench(bench, common, m); }; });
  }

  EntropyOptions ent;
  {
    auto* s = sub("entropy", "Top-mass entropy of word and emoji distributions");
    s->add_option("--input,-i", ent.input)->required()->check(CLI::ExistingFile);
    s->add_option("--format", ent.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--mass", ent.mass)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    s->add_flag("--no-renormalize", ent.no_renormalize, "Use shares of the full distribution");
    s->callback([&] { command = "entropy"; action = [&](RunManifest& m) { return run_entropy(ent, common, m); }; });
  }

  IndexOptions idx;
  {
    auto* s = sub("index", "Daily emoji share and its correlation with a price series");
    s->add_option("--input,-i", idx.input)->required()->check(CLI::ExistingFile);
    s->add_option("--format", idx.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}))->capture_default_str();
    s->add_option("--emoji", idx.emoji)->capture_default_str();
    s->add_option("--prices", idx.prices, "CSV of date,value")->check(CLI::ExistingFile);
    s->add_option("--csv", idx.csv, "Also write date,ratio CSV");
    s->callback([&] { command = "index"; action = [&](RunManifest& m) { return run_index(idx, common, m); }; });
  }

  SynthOptions synth;
  {
    auto* s = sub("synth", "Generate a labeled synthetic corpus");
    s->add_option("--out,-o", synth.out)->required();
    s->add_option("--n", synth.cfg.n_posts)->capture_default_str();
    s->add_option("--noise", synth.cfg.label_noise)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    s->add_option("--text-signal", synth.cfg.text_signal)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    s->add_option("--bullish-emoji", synth.cfg.bullish_emoji)->capture_default_str();
    s->add_option("--bearish-emoji", synth.cfg.bearish_emoji)->capture_default_str();
    s->add_option("--neutral-emojis", synth.cfg.neutral_emojis)->delimiter(',');
    s->add_option("--id-prefix", synth.cfg.id_prefix)->capture_default_str();
    s->callback([&] { command = "synth"; action = [&](RunManifest& m) { return run_synth(synth, common, m); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    RunManifest manifest(command, args, common.seed, parse_mode(common.mode));
    auto payload = action(manifest);
    payload["manifest"] = manifest.to_json();
    std::cout << payload.dump(2) << '\n';
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "finmoji " << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "finmoji " << command << ": numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "finmoji " << command << ": " << e.what() << '\n';
    return kExitData;
  }
}
