#pragma once

#include "neurotext/adapter.hpp"
#include "neurotext/baseline.hpp"
#include "neurotext/corrector.hpp"
#include "neurotext/synthdata.hpp"
#include "neurotext/types.hpp"

#include <filesystem>

namespace neurotext {

// Every binary-backed format is a JSON header <stem>.json naming a raw
// little-endian blob <stem>.bin next to it. Recordings and features store
// float32 samples in time-major, channel-minor order; model files store
// float64 blocks in the documented order. All loaders validate shapes and
// throw io_error on malformed input.

void save_recording(const std::filesystem::path& stem, const RawRecording& rec);
RawRecording load_recording(const std::filesystem::path& stem);

void save_features(const std::filesystem::path& stem, const EnvelopeFeatures& features);
EnvelopeFeatures load_features(const std::filesystem::path& stem);

void save_manifest(const std::filesystem::path& path, const TranscriptManifest& manifest);
TranscriptManifest load_manifest(const std::filesystem::path& path);

// Blob order: w_input, w_recur, bias, w_proj, b_proj (row-major). When the
// training config is supplied it is recorded in the header for provenance.
void save_adapter(const std::filesystem::path& stem, const AdapterParams& params,
                  const TrainingConfig* config = nullptr);
AdapterParams load_adapter(const std::filesystem::path& stem);

// Blob order: m (row-major), bias.
void save_calibration(const std::filesystem::path& stem, const CalibrationMap& map);
CalibrationMap load_calibration(const std::filesystem::path& stem);

// Blob order: weights (row-major), variance.
void save_encoding(const std::filesystem::path& stem, const EncodingModel& model);
EncodingModel load_encoding(const std::filesystem::path& stem);

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth load_ground_truth(const std::filesystem::path& path);

}  // namespace neurotext
