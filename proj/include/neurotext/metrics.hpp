#pragma once

#include "neurotext/embedder.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace neurotext {

// Sentence-level BLEU, n = 1..4 modified precisions with add-one smoothing
// on every order, geometric mean, brevity penalty exp(1 - r/c) when c < r.
// An empty candidate scores 0. Throws std::invalid_argument on an empty
// reference.
double bleu(std::string_view candidate, std::string_view reference);

// Cosine between the two embedded texts. Throws on empty text (via embed).
double semantic_score(std::string_view candidate, std::string_view reference,
                      const EmbedderConfig& cfg = {});

struct SentenceScore {
  double bleu = 0.0;
  double semantic = 0.0;
};

struct ScoreReport {
  std::vector<SentenceScore> sentences;
  double bleu_mean = 0.0;
  double bleu_sd = 0.0;
  double semantic_mean = 0.0;
  double semantic_sd = 0.0;
  std::optional<double> p_vs_other;  // paired t-test on semantic scores

  std::vector<double> semantic_values() const;
  std::vector<double> bleu_values() const;
};

// Fills the aggregate fields (mean and sample standard deviation).
ScoreReport make_report(std::vector<SentenceScore> sentences);

// Scores every reference against a uniformly sampled non-identical corpus
// sentence. Throws std::invalid_argument when the corpus has fewer than two
// sentences or no admissible partner exists for some reference.
ScoreReport random_control(std::span<const std::string> references,
                           std::span<const std::string> corpus, std::uint64_t seed,
                           const EmbedderConfig& cfg = {});

// Two-sided paired t-test. Throws std::invalid_argument on length mismatch,
// n < 3, or zero variance of the differences.
double paired_t_test(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);

}  // namespace neurotext
