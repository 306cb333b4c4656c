#pragma once

#include "neurotext/adapter.hpp"
#include "neurotext/embedder.hpp"
#include "neurotext/types.hpp"

#include <string>
#include <vector>

namespace neurotext {

// Phase 2 trainable state: an affine map fitted on (neural, text) embedding
// pairs that pulls adapter outputs onto the text-embedding manifold.
struct CalibrationMap {
  Matrix m;                  // D x D
  std::vector<double> bias;  // D
  double lambda = 0.0;
};

CalibrationMap identity_calibration(std::size_t dim);

// Ridge fit minimizing sum ||M n_i + b - t_i||^2 + lambda ||M||_F^2 (the bias
// is not penalized). neural and text are P x D with matched rows.
// Throws std::invalid_argument when lambda <= 0 or shapes mismatch.
CalibrationMap calibrate(const Matrix& neural, const Matrix& text, double lambda);

// Affine map followed by re-normalization.
Embedding apply_calibration(const CalibrationMap& map, const Embedding& e);

struct InvertConfig {
  std::size_t max_len = 12;
  std::size_t beam_width = 8;
  std::size_t max_steps = 16;
};

// One candidate sentence during inversion. embedding is always embed(tokens
// joined by spaces) and score its cosine against the target.
struct Hypothesis {
  std::vector<std::string> tokens;
  Embedding embedding;
  double score = -2.0;
};

// Inverts an embedding to text by beam search over single-token edits
// (substitute / insert / delete), maximizing cosine similarity. Starts from
// the best single word, keeps the best-ever hypothesis, breaks ties
// lexicographically, and stops when the beam reaches a fixed point or after
// max_steps refinement steps. Deterministic.
// Throws std::invalid_argument on an empty vocabulary.
Hypothesis invert(const Embedding& target, const Vocabulary& vocab, const InvertConfig& cfg,
                  const EmbedderConfig& embedder = {});

struct DecodeResult {
  std::string text;
  double score = 0.0;
};

// Full read-out: adapter forward, calibration, inversion.
DecodeResult decode(const AdapterParams& params, const CalibrationMap& map,
                    const Matrix& segment_features, const Vocabulary& vocab,
                    const InvertConfig& cfg, const EmbedderConfig& embedder = {});

}  // namespace neurotext
