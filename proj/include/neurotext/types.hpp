#pragma once

#include "neurotext/linalg.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace neurotext {

// Thrown on unreadable/unwritable files and malformed on-disk data.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an optimization produces a non-finite loss.
struct diverged_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Multichannel time series at a fixed sample rate. data is samples x channels.
struct RawRecording {
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_ids;
  Matrix data;

  std::size_t num_samples() const { return data.rows; }
  std::size_t num_channels() const { return data.cols; }
};

// Frame-rate envelope features derived from a RawRecording. data is frames x channels.
struct EnvelopeFeatures {
  double frame_rate_hz = 100.0;
  Matrix data;

  std::size_t num_frames() const { return data.rows; }
  std::size_t num_channels() const { return data.cols; }
};

struct SentenceWindow {
  std::string text;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct StoryTranscript {
  std::string story_id;
  std::vector<SentenceWindow> sentences;
};

struct TranscriptManifest {
  std::vector<StoryTranscript> stories;

  const StoryTranscript& story(const std::string& story_id) const;
};

// Throws std::invalid_argument if windows are malformed (empty text, reversed
// or overlapping windows, out-of-order sentences).
void validate(const TranscriptManifest& manifest);

// One sentence's neural feature frames paired with its transcript text.
struct SentenceSegment {
  std::string story_id;
  std::size_t index = 0;  // position within the story's sentence list
  std::string text;
  Matrix features;  // frames x channels
};

}  // namespace neurotext
