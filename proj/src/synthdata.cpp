#include "neurotext/synthdata.hpp"

#include "neurotext/rng.hpp"
#include "neurotext/signal.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace neurotext {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Seed streams for the independent random choices of one corpus.
enum : std::uint64_t { kSentenceStream = 1, kMixingStream = 2, kCarrierStream = 3, kNoiseStream = 16 };

}  // namespace

GrammarSpec GrammarSpec::defaults() {
  GrammarSpec g;
  g.subjects = {"falcon", "turtle", "painter", "farmer", "robot", "child"};
  g.verbs = {"chased", "lifted", "painted", "dropped", "watched", "carried"};
  g.objects = {"marble", "lantern", "basket", "mirror", "kite", "drum"};
  g.modifiers = {"shiny", "heavy", "broken", "little"};
  return g;
}

std::size_t GrammarSpec::combinations() const {
  return subjects.size() * verbs.size() * objects.size() * (modifiers.size() + 1);
}

SynthCorpus generate(const SynthConfig& config) {
  if (config.num_stories < 2)
    throw std::invalid_argument("generate: need at least 2 stories for cross-validation");
  if (config.channels < 1) throw std::invalid_argument("generate: need at least one channel");
  if (config.grammar.subjects.empty() || config.grammar.verbs.empty() ||
      config.grammar.objects.empty())
    throw std::invalid_argument("generate: grammar word lists must be non-empty");
  if (!config.noiseless && !std::isfinite(config.snr_db))
    throw std::invalid_argument("generate: snr_db must be finite unless noiseless");

  const std::size_t total = config.num_stories * config.sentences_per_story;
  if (total > config.grammar.combinations())
    throw std::invalid_argument(
        "generate: grammar too small to produce " + std::to_string(total) +
        " distinct sentences (" + std::to_string(config.grammar.combinations()) + " available)");

  // Distinct sentences: enumerate every grammar combination, shuffle, take
  // the first `total`.
  const GrammarSpec& g = config.grammar;
  std::vector<std::string> sentences;
  sentences.reserve(g.combinations());
  for (const std::string& s : g.subjects)
    for (const std::string& v : g.verbs)
      for (std::size_t m = 0; m <= g.modifiers.size(); ++m)
        for (const std::string& o : g.objects) {
          std::string text = s + " " + v + " ";
          if (m > 0) text += g.modifiers[m - 1] + " ";
          text += o;
          sentences.push_back(std::move(text));
        }
  Rng sentence_rng(derive_seed(config.seed, kSentenceStream));
  sentence_rng.shuffle(sentences);
  sentences.resize(total);

  SynthCorpus corpus;
  corpus.truth.noise_seed = derive_seed(config.seed, kNoiseStream);

  // Ground-truth mixing: unit-norm row per channel.
  const std::size_t dim = config.embedder.dim;
  Rng mix_rng(derive_seed(config.seed, kMixingStream));
  corpus.truth.mixing = Matrix(config.channels, dim);
  for (std::size_t ch = 0; ch < config.channels; ++ch) {
    double* row = corpus.truth.mixing.row(ch);
    for (std::size_t d = 0; d < dim; ++d) row[d] = mix_rng.normal();
    const double n = norm2(row, dim);
    for (std::size_t d = 0; d < dim; ++d) row[d] /= n;
  }

  Rng carrier_rng(derive_seed(config.seed, kCarrierStream));
  corpus.truth.carrier_hz.resize(config.channels);
  corpus.truth.carrier_phase.resize(config.channels);
  for (std::size_t ch = 0; ch < config.channels; ++ch) {
    corpus.truth.carrier_hz[ch] = carrier_rng.uniform(config.carrier_low_hz, config.carrier_high_hz);
    corpus.truth.carrier_phase[ch] = carrier_rng.uniform(0.0, 2.0 * kPi);
  }

  const double sr = config.sample_rate_hz;
  std::size_t sentence_cursor = 0;
  for (std::size_t s = 0; s < config.num_stories; ++s) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "story%02zu", s);
    const std::string story_id = buf;

    StoryTranscript story;
    story.story_id = story_id;
    double t = config.lead_in_s;
    for (std::size_t i = 0; i < config.sentences_per_story; ++i) {
      const std::string& text = sentences[sentence_cursor + i];
      const double dur =
          config.word_duration_s * static_cast<double>(normalize_text(text).size());
      story.sentences.push_back(SentenceWindow{text, t, t + dur});
      t += dur + config.sentence_gap_s;
    }
    const std::size_t samples = static_cast<std::size_t>(std::ceil((t + config.lead_in_s) * sr));

    RawRecording rec;
    rec.sample_rate_hz = sr;
    for (std::size_t ch = 0; ch < config.channels; ++ch) {
      std::snprintf(buf, sizeof(buf), "e%03zu", ch);
      rec.channel_ids.push_back(buf);
    }
    rec.data = Matrix(samples, config.channels);

    // Clean signal: per sentence, a raised-cosine bump modulating per-channel
    // in-band carriers, with amplitude linear in (mixing . embedding).
    std::vector<double> amplitude(config.channels);
    for (std::size_t i = 0; i < story.sentences.size(); ++i) {
      const SentenceWindow& win = story.sentences[i];
      const Embedding e = embed(win.text, config.embedder);

      TruthSentence truth;
      truth.story_id = story_id;
      truth.index = i;
      truth.text = win.text;
      truth.embedding = e;
      corpus.truth.sentences.push_back(std::move(truth));

      for (std::size_t ch = 0; ch < config.channels; ++ch)
        amplitude[ch] = config.carrier_base +
                        config.carrier_gain * dot(corpus.truth.mixing.row(ch), e.values.data(), dim);

      const std::size_t lo = frame_floor(win.start_s, sr);
      const std::size_t hi = std::min(frame_ceil(win.end_s, sr), samples);
      const double dur = win.end_s - win.start_s;
      for (std::size_t n = lo; n < hi; ++n) {
        const double tn = static_cast<double>(n) / sr;
        const double bump = 0.5 * (1.0 - std::cos(2.0 * kPi * (tn - win.start_s) / dur));
        for (std::size_t ch = 0; ch < config.channels; ++ch) {
          const double carrier =
              std::cos(2.0 * kPi * corpus.truth.carrier_hz[ch] * tn + corpus.truth.carrier_phase[ch]);
          rec.data(n, ch) += bump * amplitude[ch] * carrier;
        }
      }
    }

    if (!config.noiseless) {
      // Scale white noise so that clean power / noise power over the speech
      // windows meets snr_db exactly.
      Rng noise_rng(derive_seed(corpus.truth.noise_seed, s));
      Matrix noise(samples, config.channels);
      for (double& x : noise.v) x = noise_rng.normal();

      double p_clean = 0.0, p_noise = 0.0;
      for (const SentenceWindow& win : story.sentences) {
        const std::size_t lo = frame_floor(win.start_s, sr);
        const std::size_t hi = std::min(frame_ceil(win.end_s, sr), samples);
        for (std::size_t n = lo; n < hi; ++n)
          for (std::size_t ch = 0; ch < config.channels; ++ch) {
            p_clean += rec.data(n, ch) * rec.data(n, ch);
            p_noise += noise(n, ch) * noise(n, ch);
          }
      }
      const double target = std::pow(10.0, config.snr_db / 10.0);
      const double scale = std::sqrt(p_clean / (p_noise * target));
      for (std::size_t i = 0; i < rec.data.v.size(); ++i) rec.data.v[i] += scale * noise.v[i];
    }

    corpus.story_ids.push_back(story_id);
    corpus.recordings.push_back(std::move(rec));
    corpus.manifest.stories.push_back(std::move(story));
    sentence_cursor += config.sentences_per_story;
  }

  validate(corpus.manifest);
  return corpus;
}

const Embedding& oracle_embedding(const GroundTruth& truth, const std::string& story_id,
                                  std::size_t index) {
  for (const TruthSentence& s : truth.sentences)
    if (s.story_id == story_id && s.index == index) return s.embedding;
  throw std::invalid_argument("oracle_embedding: unknown sentence " + story_id + ":" +
                              std::to_string(index));
}

double measured_snr_db(const RawRecording& clean, const RawRecording& noisy,
                       const StoryTranscript& story) {
  if (!clean.data.same_shape(noisy.data))
    throw std::invalid_argument("measured_snr_db: recordings differ in shape");
  double p_clean = 0.0, p_noise = 0.0;
  for (const SentenceWindow& win : story.sentences) {
    const std::size_t lo = frame_floor(win.start_s, clean.sample_rate_hz);
    const std::size_t hi = std::min(frame_ceil(win.end_s, clean.sample_rate_hz), clean.num_samples());
    for (std::size_t n = lo; n < hi; ++n)
      for (std::size_t ch = 0; ch < clean.num_channels(); ++ch) {
        const double c = clean.data(n, ch);
        const double d = noisy.data(n, ch) - c;
        p_clean += c * c;
        p_noise += d * d;
      }
  }
  if (p_noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(p_clean / p_noise);
}

}  // namespace neurotext
