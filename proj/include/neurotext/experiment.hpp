#pragma once

#include "neurotext/adapter.hpp"
#include "neurotext/baseline.hpp"
#include "neurotext/corrector.hpp"
#include "neurotext/metrics.hpp"
#include "neurotext/synthdata.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace neurotext {

struct ExperimentPlan {
  SynthConfig synth;
  TrainingConfig training;
  InvertConfig invert;
  BaselineSearchConfig baseline_search;

  double band_low_hz = 70.0;
  double band_high_hz = 150.0;
  double frame_rate_hz = 100.0;

  double calibration_lambda = 0.1;
  double encoding_lambda = 1.0;
  std::vector<int> lags{0, 1, 2, 3};
  double lm_smoothing = 0.1;

  // Fraction of each story's final sentences held out for testing.
  double test_fraction = 0.2;

  std::vector<double> fractions{0.2, 0.4, 0.6, 0.8, 1.0};
  std::size_t repeats = 5;

  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct DecodedSentence {
  std::string variant;
  std::size_t fold = 0;
  std::string story_id;
  std::size_t index = 0;
  double fraction = 1.0;  // scaling runs only
  std::size_t repeat = 0;
  std::string reference;
  std::string decoded;
  double bleu = 0.0;
  double semantic = 0.0;
};

struct FoldResult {
  std::size_t fold = 0;
  std::string story_id;
  std::vector<DecodedSentence> rows;
  std::map<std::string, ScoreReport> reports;             // per variant
  std::vector<std::string> train_sentence_keys;           // "story:index" seen in training batches
  std::vector<std::string> test_sentence_keys;
};

struct ScalingPoint {
  std::string axis;
  double fraction = 0.0;
  std::size_t repeat = 0;
  std::vector<DecodedSentence> rows;
  ScoreReport report;
};

struct ExperimentResult {
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  std::vector<ScalingPoint> scaling;
  std::map<std::string, ScoreReport> pooled;  // per variant, all folds pooled
  std::map<std::string, double> p_vs_random;  // per variant, pooled semantic scores
  double wall_seconds = 0.0;
};

// Leave-one-story-out over the final test_fraction of each story's
// sentences: train both phases on the rest, decode the held-out block with
// the two-phase pipeline, the encoding-model baseline and a random control.
ExperimentResult run_cv(const ExperimentPlan& plan);

// Variants: full (both phases), adapter_only (identity calibration),
// corrector_only (untrained adapter, fitted calibration), random.
ExperimentResult run_ablation(const ExperimentPlan& plan);

// Round-robin: each fold holds out one entire story from both phases.
ExperimentResult run_out_of_domain(const ExperimentPlan& plan);

enum class ScalingAxis { data, electrodes };

// Retrains on random subsets of training sentences or channels, one subset
// per (fraction, repeat), evaluating on the fixed held-out block.
ExperimentResult run_scaling(const ExperimentPlan& plan, ScalingAxis axis);

// Writes scores.csv, summary.json, transcripts.txt and SVG plots under out_dir.
void emit_report(const ExperimentResult& result, const std::filesystem::path& out_dir);

// The per-sentence CSV alone (byte-stable across identical runs).
void write_scores_csv(const ExperimentResult& result, const std::filesystem::path& path);

}  // namespace neurotext
