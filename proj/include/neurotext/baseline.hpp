#pragma once

#include "neurotext/embedder.hpp"
#include "neurotext/types.hpp"

#include <string>
#include <vector>

namespace neurotext {

// A stimulus embedding active over a half-open frame span.
struct StimulusSpan {
  Embedding embedding;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
};

// Lagged stimulus design: row t concatenates, for each lag, the embedding
// active at frame t - lag (zero outside every span). Lags must be >= 0.
Matrix build_design(std::span<const StimulusSpan> spans, std::size_t num_frames,
                    std::span<const int> lags, std::size_t dim);

// Per-electrode ridge weights over lagged stimulus features plus a floored
// diagonal residual variance.
struct EncodingModel {
  std::vector<int> lags;
  std::size_t dim = 0;
  std::size_t channels = 0;
  Matrix weights;                // (lags * dim) x channels
  std::vector<double> variance;  // per channel, floored at variance_floor
  double lambda = 0.0;

  static constexpr double variance_floor = 1e-6;
};

// Ridge solution per channel with a shared Gram matrix. lambda = 0 is allowed
// only when the system is full rank; a singular system raises
// std::runtime_error.
EncodingModel fit_encoding(const Matrix& design, const Matrix& responses, double lambda,
                           std::span<const int> lags, std::size_t dim);

// Diagonal-Gaussian log density of the observed responses over [start, end),
// with the mean predicted from the candidate embedding placed uniformly
// across the span.
double log_likelihood(const EncodingModel& model, const Matrix& responses,
                      const Embedding& candidate, std::size_t start_frame,
                      std::size_t end_frame);

// Bigram proposal model with add-k smoothing. Contexts include a virtual
// start token; continuations include a virtual end token, and the smoothed
// probabilities over vocabulary + end sum to 1 per context.
struct NgramLM {
  Vocabulary vocab;
  double k = 0.1;
  Matrix counts;  // (V+1 contexts: words then start) x (V+1 nexts: words then end)

  double prob(std::size_t context, std::size_t next) const;  // indices as in counts
  std::size_t start_context() const { return vocab.size(); }
  std::size_t end_token() const { return vocab.size(); }
};

NgramLM fit_bigram_lm(std::span<const std::string> texts, double k = 0.1);

struct BaselineSearchConfig {
  std::size_t beam_width = 16;
  std::size_t proposals = 8;  // LM continuations expanded per hypothesis
  std::size_t max_len = 12;
};

struct BaselineDecodeResult {
  std::string text;
  double log_likelihood = 0.0;
};

// Grows candidate sentences left to right. The LM only proposes
// continuations; ranking is purely by encoding-model likelihood of the
// candidate so far. Ties break lexicographically. Deterministic.
BaselineDecodeResult beam_decode(const EncodingModel& model, const Matrix& responses,
                                 std::size_t start_frame, std::size_t end_frame,
                                 const NgramLM& lm, const BaselineSearchConfig& cfg,
                                 const EmbedderConfig& embedder = {});

}  // namespace neurotext
