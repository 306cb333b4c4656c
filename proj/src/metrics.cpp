#include "neurotext/metrics.hpp"

#include "neurotext/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace neurotext {

namespace {

// Regularized incomplete beta via Lentz's continued fraction; accurate to
// well under 1e-10 for the degrees of freedom seen here.
double betacf(double a, double b, double x) {
  constexpr int max_iter = 300;
  constexpr double eps = 3e-16;
  constexpr double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double bt =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
               b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

std::map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t j = 0; j < n; ++j) {
      if (j) key.push_back('\x1f');
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double bleu(std::string_view candidate, std::string_view reference) {
  const std::vector<std::string> ref = normalize_text(reference);
  if (ref.empty()) throw std::invalid_argument("bleu: empty reference");
  const std::vector<std::string> cand = normalize_text(candidate);
  if (cand.empty()) return 0.0;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand_counts = ngram_counts(cand, n);
    const auto ref_counts = ngram_counts(ref, n);
    int clipped = 0, total = 0;
    for (const auto& [key, count] : cand_counts) {
      total += count;
      const auto it = ref_counts.find(key);
      if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    if (n == 1) {
      // the unigram precision stays raw so zero-overlap candidates score 0
      if (clipped == 0) return 0.0;
      log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(total));
    } else {
      // add-one smoothing on the higher orders
      log_sum += std::log((clipped + 1.0) / (total + 1.0));
    }
  }
  const double geo = std::exp(log_sum / 4.0);
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double bp = (c < r) ? std::exp(1.0 - r / c) : 1.0;
  return geo * bp;
}

double semantic_score(std::string_view candidate, std::string_view reference,
                      const EmbedderConfig& cfg) {
  return cosine(embed(candidate, cfg), embed(reference, cfg));
}

std::vector<double> ScoreReport::semantic_values() const {
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const SentenceScore& s : sentences) out.push_back(s.semantic);
  return out;
}

std::vector<double> ScoreReport::bleu_values() const {
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const SentenceScore& s : sentences) out.push_back(s.bleu);
  return out;
}

ScoreReport make_report(std::vector<SentenceScore> sentences) {
  ScoreReport report;
  report.sentences = std::move(sentences);
  const std::vector<double> b = report.bleu_values();
  const std::vector<double> s = report.semantic_values();
  report.bleu_mean = mean(b);
  report.bleu_sd = sample_sd(b);
  report.semantic_mean = mean(s);
  report.semantic_sd = sample_sd(s);
  return report;
}

ScoreReport random_control(std::span<const std::string> references,
                           std::span<const std::string> corpus, std::uint64_t seed,
                           const EmbedderConfig& cfg) {
  if (corpus.size() < 2) throw std::invalid_argument("random_control: corpus needs >= 2 sentences");

  std::vector<std::vector<std::string>> corpus_tokens;
  corpus_tokens.reserve(corpus.size());
  for (const std::string& text : corpus) corpus_tokens.push_back(normalize_text(text));

  Rng rng(seed);
  std::vector<SentenceScore> scores;
  scores.reserve(references.size());
  for (const std::string& ref : references) {
    const std::vector<std::string> ref_tokens = normalize_text(ref);
    std::vector<std::size_t> admissible;
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (corpus_tokens[i] != ref_tokens) admissible.push_back(i);
    if (admissible.empty())
      throw std::invalid_argument("random_control: no non-identical corpus sentence for '" + ref +
                                  "'");
    const std::size_t pick = admissible[static_cast<std::size_t>(rng.below(admissible.size()))];
    SentenceScore s;
    s.bleu = bleu(corpus[pick], ref);
    s.semantic = semantic_score(corpus[pick], ref, cfg);
    scores.push_back(s);
  }
  return make_report(std::move(scores));
}

double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: length mismatch");
  const std::size_t n = a.size();
  if (n < 3) throw std::invalid_argument("paired_t_test: need at least 3 pairs");

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  const double m = mean(diff);
  const double sd = sample_sd(diff);
  if (sd == 0.0) throw std::invalid_argument("paired_t_test: zero variance of differences");

  const double t = m / (sd / std::sqrt(static_cast<double>(n)));
  const double nu = static_cast<double>(n - 1);
  return betai(nu / 2.0, 0.5, nu / (nu + t * t));
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman: need two equal-length series of >= 2 points");
  const std::size_t n = x.size();

  auto ranks_of = [n](std::span<const double> xs) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return xs[a] < xs[b];
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
      i = j + 1;
    }
    return ranks;
  };

  const std::vector<double> rx = ranks_of(x);
  const std::vector<double> ry = ranks_of(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("spearman: constant series has no rank correlation");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace neurotext
