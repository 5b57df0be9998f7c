#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finmoji/corpus.hpp"
#include "finmoji/error.hpp"
#include "finmoji/random.hpp"
#include "finmoji/vectorizer.hpp"

namespace finmoji {

enum class ModelFamily { Logistic, MultinomialNB };

inline const char* to_string(ModelFamily f) { return f == ModelFamily::Logistic ? "logistic" : "nb"; }

inline ModelFamily parse_family(std::string_view s) {
  if (s == "logistic") return ModelFamily::Logistic;
  if (s == "nb" || s == "multinomial_nb") return ModelFamily::MultinomialNB;
  throw std::invalid_argument("unknown model family: " + std::string(s));
}

struct TrainConfig {
  double l2_lambda = 1.0;
  int max_iters = 200;
  double tol = 1e-6;
  std::uint64_t seed = 42;
  double nb_alpha = 1.0;

  void validate() const {
    if (!(l2_lambda >= 0.0) || max_iters <= 0 || !(tol > 0.0) || !(nb_alpha > 0.0)) {
      throw std::invalid_argument("TrainConfig: l2_lambda >= 0, max_iters > 0, tol > 0, nb_alpha > 0 required");
    }
  }
};

struct TrainingSummary {
  int iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Binary linear classifier; positive scores favour Bullish. For Naive Bayes
// the weights are per-token log-likelihood ratios and the bias is the
// log-prior ratio.
struct LinearModel {
  ModelFamily family = ModelFamily::Logistic;
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;
  TrainingSummary training;

  std::size_t dim() const noexcept { return weights.size(); }
  double score(const SparseVector& x) const { return x.dot(weights) + bias; }
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

inline double label_sign(SentimentLabel l) { return l == SentimentLabel::Bullish ? 1.0 : -1.0; }

namespace detail {

inline std::size_t check_design(std::span<const SparseVector> X, std::span<const SentimentLabel> y) {
  if (X.size() != y.size()) throw std::invalid_argument("features and labels differ in length");
  if (X.size() < 2) throw DataError("training needs at least two examples");
  const std::size_t dim = X.front().dim;
  bool bull = false, bear = false;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (X[i].dim != dim) throw std::invalid_argument("feature dimension mismatch");
    (y[i] == SentimentLabel::Bullish ? bull : bear) = true;
  }
  if (!bull || !bear) throw DataError("training data contains a single class");
  return dim;
}

}  // namespace detail

struct LogisticObjective {
  double value = 0.0;
  std::vector<double> grad_w;
  double grad_b = 0.0;
};

// Mean L2-regularized logistic loss:
//   (1/n) * [ sum_i log(1 + exp(-y_i (w.x_i + b))) + (lambda/2) |w|^2 ]
// The bias is not penalized.
inline LogisticObjective logistic_objective(std::span<const SparseVector> X, std::span<const SentimentLabel> y,
                                            std::span<const double> w, double b, double lambda) {
  const double inv_n = 1.0 / static_cast<double>(X.size());
  LogisticObjective out;
  out.grad_w.assign(w.size(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double s = label_sign(y[i]);
    const double margin = s * (X[i].dot(w) + b);
    loss += softplus(-margin);
    const double coef = -s * sigmoid(-margin);
    for (const auto& e : X[i].entries) out.grad_w[e.index] += coef * e.value;
    out.grad_b += coef;
  }
  double sq = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    sq += w[k] * w[k];
    out.grad_w[k] = (out.grad_w[k] + lambda * w[k]) * inv_n;
  }
  out.grad_b *= inv_n;
  out.value = (loss + 0.5 * lambda * sq) * inv_n;
  return out;
}

// Full-batch L-BFGS (memory 10) with Armijo backtracking, over the packed
// parameter vector [w, b]. Stops when the gradient norm drops to cfg.tol or
// after cfg.max_iters steps.
inline LinearModel train_logistic(std::span<const SparseVector> X, std::span<const SentimentLabel> y,
                                  const TrainConfig& cfg = {}) {
  cfg.validate();
  const std::size_t dim = detail::check_design(X, y);
  const std::size_t np = dim + 1;
  const double n = static_cast<double>(X.size());
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;

  auto evaluate_at = [&](const std::vector<double>& theta, std::vector<double>& grad) {
    auto o = logistic_objective(X, y, std::span<const double>(theta.data(), dim), theta[dim], cfg.l2_lambda);
    grad = std::move(o.grad_w);
    grad.push_back(o.grad_b);
    return o.value;
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  };

  std::vector<double> theta(np, 0.0), grad;
  double value = evaluate_at(theta, grad);

  // 1 / (Lipschitz bound of the mean objective) scales the first step.
  double lipschitz = cfg.l2_lambda / n;
  for (const auto& x : X) {
    double sq = 1.0;
    for (const auto& e : x.entries) sq += e.value * e.value;
    lipschitz += 0.25 * sq / n;
  }

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  TrainingSummary summary;
  std::vector<double> dir(np), theta_try(np), grad_try;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (std::sqrt(dot(grad, grad)) <= cfg.tol) break;

    // Two-loop recursion: dir = -H * grad.
    dir = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t m = s_hist.size(); m-- > 0;) {
      alpha[m] = rho_hist[m] * dot(s_hist[m], dir);
      for (std::size_t k = 0; k < np; ++k) dir[k] -= alpha[m] * y_hist[m][k];
    }
    const double gamma = s_hist.empty() ? 1.0 / lipschitz
                                        : dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (auto& d : dir) d *= gamma;
    for (std::size_t m = 0; m < s_hist.size(); ++m) {
      const double beta = rho_hist[m] * dot(y_hist[m], dir);
      for (std::size_t k = 0; k < np; ++k) dir[k] += (alpha[m] - beta) * s_hist[m][k];
    }
    for (auto& d : dir) d = -d;
    double slope = dot(grad, dir);
    if (!(slope < 0.0)) {  // lost descent; restart from steepest descent
      s_hist.clear(), y_hist.clear(), rho_hist.clear();
      for (std::size_t k = 0; k < np; ++k) dir[k] = -grad[k] / lipschitz;
      slope = dot(grad, dir);
    }

    double step = 1.0, value_try = value;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      for (std::size_t k = 0; k < np; ++k) theta_try[k] = theta[k] + step * dir[k];
      value_try = evaluate_at(theta_try, grad_try);
      if (value_try <= value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent possible at double precision

    std::vector<double> sv(np), yv(np);
    for (std::size_t k = 0; k < np; ++k) sv[k] = theta_try[k] - theta[k], yv[k] = grad_try[k] - grad[k];
    const double sy = dot(sv, yv);
    if (sy > 1e-12 * dot(yv, yv)) {
      if (s_hist.size() == kMemory) s_hist.pop_front(), y_hist.pop_front(), rho_hist.pop_front();
      s_hist.push_back(std::move(sv));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
    }
    theta.swap(theta_try);
    grad.swap(grad_try);
    value = value_try;
  }
  summary.iterations = it;
  summary.objective = value;
  summary.grad_norm = std::sqrt(dot(grad, grad));
  summary.converged = summary.grad_norm <= cfg.tol;

  for (double v : theta) {
    if (!std::isfinite(v)) throw NumericError("logistic training diverged");
  }
  const double b = theta[dim];
  theta.resize(dim);
  return LinearModel{ModelFamily::Logistic, std::move(theta), b, 0.5, summary};
}

// Multinomial Naive Bayes with Laplace smoothing, folded into a linear
// score: w_t = log P(t|bull) - log P(t|bear), bias = log P(bull)/P(bear).
inline LinearModel train_multinomial_nb(std::span<const SparseVector> counts, std::span<const SentimentLabel> y,
                                        const TrainConfig& cfg = {}) {
  cfg.validate();
  const std::size_t dim = detail::check_design(counts, y);
  std::vector<double> bull(dim, 0.0), bear(dim, 0.0);
  double bull_total = 0.0, bear_total = 0.0;
  double n_bull = 0.0, n_bear = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const bool is_bull = y[i] == SentimentLabel::Bullish;
    (is_bull ? n_bull : n_bear) += 1.0;
    auto& acc = is_bull ? bull : bear;
    for (const auto& e : counts[i].entries) {
      if (e.value < 0.0) throw std::invalid_argument("train_multinomial_nb: negative count");
      acc[e.index] += e.value;
      (is_bull ? bull_total : bear_total) += e.value;
    }
  }
  const double a = cfg.nb_alpha;
  const double v = static_cast<double>(dim);
  const double log_bull_den = std::log(bull_total + a * v);
  const double log_bear_den = std::log(bear_total + a * v);
  LinearModel m;
  m.family = ModelFamily::MultinomialNB;
  m.weights.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    m.weights[k] = (std::log(bull[k] + a) - log_bull_den) - (std::log(bear[k] + a) - log_bear_den);
  }
  m.bias = std::log(n_bull) - std::log(n_bear);
  m.training.converged = true;
  return m;
}

struct Predictions {
  std::vector<SentimentLabel> labels;
  std::vector<double> probabilities;  // P(Bullish)
};

// Bullish iff P(Bullish) >= threshold; ties go to Bullish. The comparison is
// made on the logit scale so threshold 0.5 is exactly "score >= 0".
inline Predictions predict(const LinearModel& m, std::span<const SparseVector> X) {
  if (!(m.threshold > 0.0 && m.threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0, 1)");
  const double cut = std::log(m.threshold / (1.0 - m.threshold));
  Predictions out;
  out.labels.reserve(X.size());
  out.probabilities.reserve(X.size());
  for (const auto& x : X) {
    if (x.dim != m.dim()) throw std::invalid_argument("predict: feature dimension mismatch");
    const double z = m.score(x);
    out.labels.push_back(z >= cut ? SentimentLabel::Bullish : SentimentLabel::Bearish);
    out.probabilities.push_back(sigmoid(z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct Confusion {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;  // Bullish is positive

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  Confusion confusion;
  double accuracy = 0.0;
  ClassMetrics bullish;
  ClassMetrics bearish;
  ClassMetrics macro;
};

namespace detail {

inline double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

inline ClassMetrics class_metrics(double hit, double false_pos, double miss) {
  ClassMetrics m;
  m.precision = ratio_or_zero(hit, hit + false_pos);
  m.recall = ratio_or_zero(hit, hit + miss);
  m.f1 = ratio_or_zero(2.0 * m.precision * m.recall, m.precision + m.recall);
  return m;
}

}  // namespace detail

inline EvalReport report_from_confusion(const Confusion& c) {
  EvalReport r;
  r.confusion = c;
  const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  r.accuracy = detail::ratio_or_zero(tp + tn, tp + fp + fn + tn);
  r.bullish = detail::class_metrics(tp, fp, fn);
  r.bearish = detail::class_metrics(tn, fn, fp);
  // Macro averages run over the classes that occur in truth or predictions.
  const bool has_bull = c.tp + c.fp + c.fn > 0, has_bear = c.tn + c.fn + c.fp > 0;
  if (has_bull && has_bear) {
    r.macro = {(r.bullish.precision + r.bearish.precision) / 2, (r.bullish.recall + r.bearish.recall) / 2,
               (r.bullish.f1 + r.bearish.f1) / 2};
  } else {
    r.macro = has_bull ? r.bullish : r.bearish;
  }
  return r;
}

inline Confusion confusion_matrix(std::span<const SentimentLabel> pred, std::span<const SentimentLabel> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("evaluate: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == SentimentLabel::Bullish, t = truth[i] == SentimentLabel::Bullish;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline EvalReport evaluate(std::span<const SentimentLabel> pred, std::span<const SentimentLabel> truth) {
  if (pred.empty()) throw std::invalid_argument("evaluate: empty input");
  return report_from_confusion(confusion_matrix(pred, truth));
}

inline constexpr std::array<std::string_view, 7> kMetricNames = {
    "accuracy", "precision", "recall", "f1", "bullish_precision", "bullish_recall", "bullish_f1"};

// Metric values in kMetricNames order; P/R/F1 without prefix are macro.
inline std::array<double, 7> metric_values(const EvalReport& r) {
  return {r.accuracy, r.macro.precision, r.macro.recall, r.macro.f1, r.bullish.precision, r.bullish.recall,
          r.bullish.f1};
}

// Linear-interpolated quantile of sorted data (numpy's default).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw NumericError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct MetricInterval {
  std::string name;
  double mean = 0.0;
  double lo = 0.0;  // 2.5th percentile
  double hi = 0.0;  // 97.5th percentile
};

struct BootstrapCI {
  std::vector<MetricInterval> metrics;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;

  const MetricInterval& operator[](std::string_view name) const {
    for (const auto& m : metrics) {
      if (m.name == name) return m;
    }
    throw std::out_of_range("no bootstrap metric " + std::string(name));
  }
};

// Resamples (prediction, truth) pairs jointly with replacement at full size.
inline BootstrapCI bootstrap_ci(std::span<const SentimentLabel> pred, std::span<const SentimentLabel> truth,
                               std::size_t n_resamples = 1000, std::uint64_t seed = 42) {
  if (pred.size() != truth.size()) throw std::invalid_argument("bootstrap_ci: length mismatch");
  if (pred.size() < 2) throw std::invalid_argument("bootstrap_ci: need at least two predictions");
  if (n_resamples == 0) throw std::invalid_argument("bootstrap_ci: n_resamples must be positive");

  const std::size_t n = pred.size();
  std::vector<std::array<double, 7>> draws(n_resamples);
  Rng rng(seed);
  for (auto& d : draws) {
    Confusion c;
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(uniform_index(rng, n));
      const bool p = pred[i] == SentimentLabel::Bullish, t = truth[i] == SentimentLabel::Bullish;
      if (p && t) ++c.tp;
      else if (p) ++c.fp;
      else if (t) ++c.fn;
      else ++c.tn;
    }
    d = metric_values(report_from_confusion(c));
  }

  BootstrapCI ci;
  ci.n_resamples = n_resamples;
  ci.seed = seed;
  std::vector<double> column(n_resamples);
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n_resamples; ++r) {
      column[r] = draws[r][m];
      sum += column[r];
    }
    std::sort(column.begin(), column.end());
    ci.metrics.push_back({std::string(kMetricNames[m]), sum / static_cast<double>(n_resamples),
                          quantile_sorted(column, 0.025), quantile_sorted(column, 0.975)});
  }
  return ci;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.macro.precision;
  j["recall"] = r.macro.recall;
  j["f1"] = r.macro.f1;
  j["bullish"] = to_json(r.bullish);
  j["bearish"] = to_json(r.bearish);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
  return j;
}

inline nlohmann::ordered_json to_json(const BootstrapCI& ci) {
  nlohmann::ordered_json j;
  j["n_resamples"] = ci.n_resamples;
  j["seed"] = ci.seed;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& m : ci.metrics) metrics[m.name] = {{"mean", m.mean}, {"lo", m.lo}, {"hi", m.hi}};
  j["metrics"] = std::move(metrics);
  return j;
}

inline nlohmann::ordered_json to_json(const LinearModel& m) {
  nlohmann::ordered_json j;
  j["family"] = to_string(m.family);
  j["bias"] = m.bias;
  j["threshold"] = m.threshold;
  j["weights"] = m.weights;
  j["training"] = {{"iterations", m.training.iterations},
                   {"objective", m.training.objective},
                   {"grad_norm", m.training.grad_norm},
                   {"converged", m.training.converged}};
  return j;
}

template <typename Json>
LinearModel linear_model_from_json(const Json& j) {
  try {
    LinearModel m;
    m.family = parse_family(j.at("family").template get<std::string>());
    m.bias = j.at("bias").template get<double>();
    m.threshold = j.at("threshold").template get<double>();
    m.weights = j.at("weights").template get<std::vector<double>>();
    if (auto t = j.find("training"); t != j.end()) {
      m.training.iterations = t->value("iterations", 0);
      m.training.objective = t->value("objective", 0.0);
      m.training.grad_norm = t->value("grad_norm", 0.0);
      m.training.converged = t->value("converged", false);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

}  // namespace finmoji
