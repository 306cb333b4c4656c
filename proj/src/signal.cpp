#include "neurotext/signal.hpp"

#include "neurotext/embedder.hpp"
#include "neurotext/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace neurotext {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTransitionHz = 5.0;  // raised-cosine edge width
constexpr double kFrameEps = 1e-9;     // guards float noise in window arithmetic

// Band mask with raised-cosine transitions: 0 below low-w and above high+w,
// 1 inside [low, high].
double band_mask(double f, double low, double high) {
  const double w = kTransitionHz;
  if (f < low - w || f > high + w) return 0.0;
  if (f < low) return 0.5 * (1.0 - std::cos(kPi * (f - (low - w)) / w));
  if (f <= high) return 1.0;
  return 0.5 * (1.0 + std::cos(kPi * (f - high) / w));
}

}  // namespace

std::size_t frame_floor(double seconds, double rate_hz) {
  return static_cast<std::size_t>(std::floor(seconds * rate_hz + kFrameEps));
}

std::size_t frame_ceil(double seconds, double rate_hz) {
  return static_cast<std::size_t>(std::ceil(seconds * rate_hz - kFrameEps));
}

RawRecording bandpass_hilbert_envelope(const RawRecording& raw, double low_hz, double high_hz) {
  if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < raw.sample_rate_hz / 2.0))
    throw std::invalid_argument("bandpass_hilbert_envelope: need 0 < low < high < rate/2");
  const std::size_t n = raw.num_samples();
  if (n < 8) throw std::invalid_argument("bandpass_hilbert_envelope: recording too short (< 8 samples)");

  RawRecording out;
  out.sample_rate_hz = raw.sample_rate_hz;
  out.channel_ids = raw.channel_ids;
  out.data = Matrix(n, raw.num_channels());

  const double df = raw.sample_rate_hz / static_cast<double>(n);
  std::vector<std::complex<double>> buf(n);
  for (std::size_t ch = 0; ch < raw.num_channels(); ++ch) {
    for (std::size_t t = 0; t < n; ++t) buf[t] = std::complex<double>(raw.data(t, ch), 0.0);
    fft(buf, false);

    // Analytic-signal weights: positive bins doubled, negative bins zeroed,
    // all shaped by the band mask.
    buf[0] *= band_mask(0.0, low_hz, high_hz);
    for (std::size_t k = 1; k < n; ++k) {
      const double f = static_cast<double>(k) * df;
      if (2 * k == n) {
        buf[k] *= band_mask(f, low_hz, high_hz);  // Nyquist bin, not doubled
      } else if (2 * k < n) {
        buf[k] *= 2.0 * band_mask(f, low_hz, high_hz);
      } else {
        buf[k] = 0.0;
      }
    }

    fft(buf, true);
    for (std::size_t t = 0; t < n; ++t) out.data(t, ch) = std::abs(buf[t]);
  }
  return out;
}

EnvelopeFeatures downsample(const RawRecording& env, double target_hz) {
  if (!(target_hz > 0.0)) throw std::invalid_argument("downsample: target rate must be positive");
  if (target_hz > env.sample_rate_hz)
    throw std::invalid_argument("downsample: target rate exceeds sample rate");
  const double ratio = env.sample_rate_hz / target_hz;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-6 || rounded < 1.0)
    throw std::invalid_argument("downsample: sample rate must be an integer multiple of target");
  const std::size_t window = static_cast<std::size_t>(rounded);

  EnvelopeFeatures out;
  out.frame_rate_hz = target_hz;
  const std::size_t frames = env.num_samples() / window;
  out.data = Matrix(frames, env.num_channels());
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t ch = 0; ch < env.num_channels(); ++ch) {
      double s = 0.0;
      for (std::size_t i = 0; i < window; ++i) s += env.data(f * window + i, ch);
      out.data(f, ch) = s / static_cast<double>(window);
    }
  }
  return out;
}

const StoryTranscript& TranscriptManifest::story(const std::string& story_id) const {
  for (const StoryTranscript& s : stories)
    if (s.story_id == story_id) return s;
  throw std::invalid_argument("manifest: unknown story '" + story_id + "'");
}

void validate(const TranscriptManifest& manifest) {
  for (const StoryTranscript& story : manifest.stories) {
    double prev_end = -1.0;
    for (std::size_t i = 0; i < story.sentences.size(); ++i) {
      const SentenceWindow& s = story.sentences[i];
      if (normalize_text(s.text).empty())
        throw std::invalid_argument("manifest: empty sentence text in story '" + story.story_id +
                                    "' at index " + std::to_string(i));
      if (!(s.start_s >= 0.0) || !(s.start_s < s.end_s))
        throw std::invalid_argument("manifest: bad window in story '" + story.story_id +
                                    "' at index " + std::to_string(i));
      if (s.start_s < prev_end)
        throw std::invalid_argument("manifest: overlapping or unordered sentences in story '" +
                                    story.story_id + "' at index " + std::to_string(i));
      prev_end = s.end_s;
    }
  }
}

std::vector<SentenceSegment> segment_by_sentence(const EnvelopeFeatures& features,
                                                 const TranscriptManifest& manifest,
                                                 const std::string& story_id) {
  validate(manifest);
  const StoryTranscript& story = manifest.story(story_id);
  const double rate = features.frame_rate_hz;

  std::vector<SentenceSegment> segments;
  segments.reserve(story.sentences.size());
  for (std::size_t i = 0; i < story.sentences.size(); ++i) {
    const SentenceWindow& s = story.sentences[i];
    const std::size_t begin = frame_floor(s.start_s, rate);
    const std::size_t end = frame_ceil(s.end_s, rate);
    if (end > features.num_frames() || begin >= end)
      throw std::out_of_range("segment_by_sentence: sentence '" + s.text + "' (story '" +
                              story_id + "', index " + std::to_string(i) +
                              ") falls outside the recording");
    SentenceSegment seg;
    seg.story_id = story_id;
    seg.index = i;
    seg.text = s.text;
    seg.features = Matrix(end - begin, features.num_channels());
    for (std::size_t f = begin; f < end; ++f)
      for (std::size_t ch = 0; ch < features.num_channels(); ++ch)
        seg.features(f - begin, ch) = features.data(f, ch);
    segments.push_back(std::move(seg));
  }
  return segments;
}

}  // namespace neurotext
