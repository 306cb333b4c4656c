#pragma once

#include "neurotext/embedder.hpp"
#include "neurotext/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace neurotext {

// Phase 1 trainable state: a single-layer LSTM over feature frames plus an
// affine projection of the final hidden state. Gate order in the stacked
// 4H dimension is input, forget, cell candidate, output.
struct AdapterParams {
  std::size_t channels = 0;  // C
  std::size_t hidden = 0;    // H
  std::size_t dim = 0;       // D

  Matrix w_input;              // 4H x C
  Matrix w_recur;              // 4H x H
  std::vector<double> bias;    // 4H
  Matrix w_proj;               // D x H
  std::vector<double> b_proj;  // D
};

struct TrainingConfig {
  double alpha = 0.25;          // weight of the contrastive term
  double tau = 0.1;             // contrastive temperature
  double margin = 1.0;          // triplet margin
  double learning_rate = 1.3e-3;
  std::size_t batch_size = 8;
  std::size_t epochs = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t hidden = 32;
  std::uint64_t seed = 0;
};

// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases except the forget-gate
// bias which starts at 1.
AdapterParams init_adapter(std::size_t channels, std::size_t hidden, std::size_t dim,
                           std::uint64_t seed);

// LSTM recurrence over the segment's frames; returns the L2-normalized
// projection of the final hidden state. Throws std::invalid_argument on a
// channel-count mismatch or an empty segment, std::runtime_error if the
// projection output is exactly zero.
Embedding adapter_forward(const AdapterParams& params, const Matrix& features);

// Loss over a batch. grad holds d(loss)/d(neural), one row per batch entry;
// the text side is a fixed target and gets no gradient.
struct LossResult {
  double loss = 0.0;
  Matrix grad;  // B x D
};

// Symmetric InfoNCE over similarity logits S[i][j] = <n_i, t_j> / tau:
// mean row-wise plus mean column-wise cross-entropy, halved.
// Requires batch size >= 2.
LossResult clip_loss(const Matrix& neural, const Matrix& text, double tau);

// Hinge on Euclidean distances with the hardest in-batch non-matching text
// embedding as the negative. Requires batch size >= 2.
LossResult triplet_loss(const Matrix& neural, const Matrix& text, double margin);

// alpha * clip + (1 - alpha) * triplet.
LossResult alignment_loss(const Matrix& neural, const Matrix& text, const TrainingConfig& cfg);

struct TrainResult {
  AdapterParams params;
  std::vector<double> loss_curve;  // per-epoch mean batch loss
  // Dataset indices per training batch, in execution order, for leakage audits.
  std::vector<std::vector<std::size_t>> batches;
};

// Adam + backpropagation through time. Deterministic given (seed, dataset,
// config): per-epoch shuffling, batch order and reduction order are all
// fixed. Throws diverged_error naming the epoch if the loss goes non-finite.
TrainResult train_adapter(std::span<const SentenceSegment> segments,
                          std::span<const Embedding> targets, const TrainingConfig& cfg);
TrainResult train_adapter(std::span<const SentenceSegment> segments,
                          std::span<const Embedding> targets, const TrainingConfig& cfg,
                          AdapterParams initial);

// Compares analytic gradients of alignment_loss(forward(...)) against central
// finite differences over every parameter block.
struct GradCheckReport {
  struct Block {
    std::string name;
    double max_rel_err = 0.0;
  };
  std::vector<Block> blocks;
  double max_rel_err = 0.0;
};

GradCheckReport grad_check(const AdapterParams& params,
                           std::span<const SentenceSegment> segments,
                           std::span<const Embedding> targets, const TrainingConfig& cfg,
                           double h = 1e-5);

}  // namespace neurotext
