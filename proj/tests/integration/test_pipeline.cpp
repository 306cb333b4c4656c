// Slower end-to-end checks that retrain the pipeline on moderate synthetic
// corpora. The fast per-module suites live under tests/unit.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "neurotext/experiment.hpp"
#include "neurotext/rng.hpp"
#include "neurotext/signal.hpp"

#include <cmath>

using namespace neurotext;

namespace {

struct FoldData {
  std::vector<SentenceSegment> train_segments, test_segments;
  std::vector<Embedding> train_targets, test_targets;
  std::vector<std::string> all_texts;
  Vocabulary vocab;
};

// One cv-style fold: the last `holdout` sentences of story 0 are the test set.
FoldData prepare_fold(const SynthConfig& synth, std::size_t holdout) {
  const SynthCorpus corpus = generate(synth);
  FoldData data;
  for (std::size_t s = 0; s < corpus.recordings.size(); ++s) {
    const RawRecording env = bandpass_hilbert_envelope(corpus.recordings[s], 70.0, 150.0);
    const EnvelopeFeatures feats = downsample(env, 100.0);
    auto segments = segment_by_sentence(feats, corpus.manifest, corpus.story_ids[s]);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const Embedding target = embed(segments[i].text, synth.embedder);
      data.all_texts.push_back(segments[i].text);
      if (s == 0 && i + holdout >= segments.size()) {
        data.test_targets.push_back(target);
        data.test_segments.push_back(std::move(segments[i]));
      } else {
        data.train_targets.push_back(target);
        data.train_segments.push_back(std::move(segments[i]));
      }
    }
  }
  data.vocab = Vocabulary::from_corpus(data.all_texts);
  return data;
}

}  // namespace

TEST_CASE("out-of-domain: the trained pipeline beats the random control") {
  ExperimentPlan plan;
  plan.synth.num_stories = 4;
  plan.synth.sentences_per_story = 10;
  plan.synth.channels = 32;
  plan.synth.noiseless = true;
  plan.training.epochs = 60;
  plan.seed = 2;

  const ExperimentResult result = run_out_of_domain(plan);
  const double full = result.pooled.at("full").semantic_mean;
  const double random = result.pooled.at("random").semantic_mean;
  CHECK(full > random);
  REQUIRE(result.p_vs_random.count("full") == 1);
  CHECK(result.p_vs_random.at("full") < 0.05);

  // every held-out story is absent from its fold's training keys
  for (const FoldResult& fold : result.folds)
    for (const std::string& key : fold.train_sentence_keys)
      CHECK(key.rfind(fold.story_id + ":", 0) != 0);
}

TEST_CASE("noiseless training drives the held-out decode score above 0.8") {
  SynthConfig synth;
  synth.num_stories = 4;
  synth.sentences_per_story = 10;
  synth.channels = 32;
  synth.noiseless = true;
  synth.seed = 5;
  FoldData data = prepare_fold(synth, 2);

  TrainingConfig cfg;
  cfg.seed = 9;
  const TrainResult trained = train_adapter(data.train_segments, data.train_targets, cfg);

  Matrix neural(data.train_segments.size(), synth.embedder.dim);
  Matrix text(data.train_segments.size(), synth.embedder.dim);
  for (std::size_t i = 0; i < data.train_segments.size(); ++i) {
    const Embedding e = adapter_forward(trained.params, data.train_segments[i].features);
    std::copy(e.values.begin(), e.values.end(), neural.row(i));
    std::copy(data.train_targets[i].values.begin(), data.train_targets[i].values.end(),
              text.row(i));
  }
  const CalibrationMap map = calibrate(neural, text, 0.1);

  double mean_score = 0.0;
  for (const SentenceSegment& seg : data.test_segments) {
    const DecodeResult res =
        decode(trained.params, map, seg.features, data.vocab, InvertConfig{}, synth.embedder);
    mean_score += res.score;
  }
  mean_score /= static_cast<double>(data.test_segments.size());
  CHECK(mean_score > 0.8);
}

TEST_CASE("an untrained adapter decodes no better than the random control") {
  SynthConfig synth;
  synth.num_stories = 5;
  synth.sentences_per_story = 10;
  synth.channels = 32;
  synth.noiseless = true;
  synth.seed = 13;
  FoldData data = prepare_fold(synth, 0);  // decode all 50 sentences
  REQUIRE(data.train_segments.size() == 50);

  const AdapterParams params = init_adapter(32, 32, synth.embedder.dim, 17);
  const CalibrationMap identity = identity_calibration(synth.embedder.dim);

  std::vector<double> untrained_scores;
  for (const SentenceSegment& seg : data.train_segments) {
    const DecodeResult res =
        decode(params, identity, seg.features, data.vocab, InvertConfig{}, synth.embedder);
    untrained_scores.push_back(semantic_score(res.text, seg.text, synth.embedder));
  }

  std::vector<std::string> references;
  for (const SentenceSegment& seg : data.train_segments) references.push_back(seg.text);
  const ScoreReport control = random_control(references, data.all_texts, 23, synth.embedder);
  const std::vector<double> control_scores = control.semantic_values();

  // two-sided paired t-test: fail to reject "no difference" at the 1% level
  const double p = paired_t_test(untrained_scores, control_scores);
  CHECK(p > 0.01);
}
