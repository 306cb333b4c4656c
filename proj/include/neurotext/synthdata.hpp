#pragma once

#include "neurotext/embedder.hpp"
#include "neurotext/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace neurotext {

// Template grammar: sentences are subject verb [modifier] object.
struct GrammarSpec {
  std::vector<std::string> subjects;
  std::vector<std::string> verbs;
  std::vector<std::string> objects;
  std::vector<std::string> modifiers;  // an empty slot is always included

  static GrammarSpec defaults();
  std::size_t combinations() const;
};

struct SynthConfig {
  std::size_t num_stories = 6;
  std::size_t sentences_per_story = 20;
  std::size_t channels = 64;
  double sample_rate_hz = 1000.0;
  double snr_db = 10.0;
  bool noiseless = false;
  std::uint64_t seed = 0;
  GrammarSpec grammar = GrammarSpec::defaults();

  // Timing of the simulated task.
  double word_duration_s = 0.28;
  double sentence_gap_s = 0.35;
  double lead_in_s = 0.8;

  // Ground-truth mixing: per-channel amplitude = carrier_base +
  // carrier_gain * (mixing row . sentence embedding), shaped by a
  // raised-cosine bump over the sentence window and carried on a per-channel
  // tone inside [carrier_low_hz, carrier_high_hz].
  double carrier_base = 1.2;
  double carrier_gain = 1.0;
  double carrier_low_hz = 85.0;
  double carrier_high_hz = 135.0;

  EmbedderConfig embedder;
};

struct TruthSentence {
  std::string story_id;
  std::size_t index = 0;
  std::string text;
  Embedding embedding;
};

// Everything the generator knows that a real experiment could not.
struct GroundTruth {
  std::vector<TruthSentence> sentences;
  Matrix mixing;                    // channels x D, unit-norm rows
  std::vector<double> carrier_hz;   // per channel
  std::vector<double> carrier_phase;
  std::uint64_t noise_seed = 0;
};

struct SynthCorpus {
  std::vector<std::string> story_ids;
  std::vector<RawRecording> recordings;  // parallel to story_ids
  TranscriptManifest manifest;
  GroundTruth truth;
};

// Fully deterministic per (config, seed). Throws std::invalid_argument when
// the grammar cannot produce the requested number of distinct sentences.
SynthCorpus generate(const SynthConfig& config);

// The exact embedding used during generation (= embed(text)).
// Throws std::invalid_argument for an unknown sentence id.
const Embedding& oracle_embedding(const GroundTruth& truth, const std::string& story_id,
                                  std::size_t index);

// Clean-power / noise-power in dB measured over the story's sentence
// windows; noise = noisy - clean. Returns +inf when the noise power is 0.
double measured_snr_db(const RawRecording& clean, const RawRecording& noisy,
                       const StoryTranscript& story);

}  // namespace neurotext
