#pragma once

#include "neurotext/types.hpp"

namespace neurotext {

// Band-limits every channel with a zero-phase frequency-domain mask
// (raised-cosine transitions, 5 Hz wide on each edge), zeroes the negative
// frequencies and returns the magnitude of the analytic signal. Output has
// the same rate and length as the input and is non-negative.
// Throws std::invalid_argument unless 0 < low < high < sample_rate / 2,
// or when the recording has fewer than 8 samples.
RawRecording bandpass_hilbert_envelope(const RawRecording& raw, double low_hz, double high_hz);

// Averages consecutive windows of sample_rate/target_hz samples (the ratio
// must be a whole number of samples). Frame f covers [f, f+1)/target_hz.
EnvelopeFeatures downsample(const RawRecording& env, double target_hz);

// Cuts features into per-sentence slices, frames [floor(start*rate),
// ceil(end*rate)). Throws std::out_of_range naming the sentence when a
// window falls outside the recording.
std::vector<SentenceSegment> segment_by_sentence(const EnvelopeFeatures& features,
                                                 const TranscriptManifest& manifest,
                                                 const std::string& story_id);

// Boundary rule shared by segmentation and the synthetic generator.
std::size_t frame_floor(double seconds, double rate_hz);
std::size_t frame_ceil(double seconds, double rate_hz);

}  // namespace neurotext
