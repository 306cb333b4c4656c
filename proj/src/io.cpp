#include "neurotext/io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace neurotext {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

template <class T>
void write_blob(const std::filesystem::path& path, const std::vector<T>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(T)));
  if (!out) throw io_error("short write to " + path.string());
}

template <class T>
std::vector<T> read_blob(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<T> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(T)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T))
    throw io_error("blob " + path.string() + " is shorter than its header claims");
  return values;
}

std::filesystem::path bin_path(const std::filesystem::path& stem) {
  std::filesystem::path p = stem;
  p += ".bin";
  return p;
}

std::filesystem::path json_path(const std::filesystem::path& stem) {
  std::filesystem::path p = stem;
  p += ".json";
  return p;
}

std::vector<float> to_f32(const Matrix& m) {
  std::vector<float> out(m.v.size());
  for (std::size_t i = 0; i < m.v.size(); ++i) out[i] = static_cast<float>(m.v[i]);
  return out;
}

}  // namespace

void save_recording(const std::filesystem::path& stem, const RawRecording& rec) {
  json header = {
      {"sample_rate_hz", rec.sample_rate_hz},
      {"channel_ids", rec.channel_ids},
      {"num_samples", rec.num_samples()},
      {"data_file", bin_path(stem.filename()).string()},
  };
  write_json(json_path(stem), header);
  write_blob(bin_path(stem), to_f32(rec.data));
}

RawRecording load_recording(const std::filesystem::path& stem) {
  const json header = read_json(json_path(stem));
  RawRecording rec;
  try {
    rec.sample_rate_hz = header.at("sample_rate_hz").get<double>();
    rec.channel_ids = header.at("channel_ids").get<std::vector<std::string>>();
    const std::size_t samples = header.at("num_samples").get<std::size_t>();
    const std::size_t channels = rec.channel_ids.size();
    const auto blob = read_blob<float>(stem.parent_path() / header.at("data_file").get<std::string>(),
                                       samples * channels);
    rec.data = Matrix(samples, channels);
    for (std::size_t i = 0; i < blob.size(); ++i) rec.data.v[i] = blob[i];
  } catch (const json::exception& e) {
    throw io_error("bad recording header " + json_path(stem).string() + ": " + e.what());
  }
  return rec;
}

void save_features(const std::filesystem::path& stem, const EnvelopeFeatures& features) {
  json header = {
      {"frame_rate_hz", features.frame_rate_hz},
      {"num_frames", features.num_frames()},
      {"num_channels", features.num_channels()},
      {"data_file", bin_path(stem.filename()).string()},
  };
  write_json(json_path(stem), header);
  write_blob(bin_path(stem), to_f32(features.data));
}

EnvelopeFeatures load_features(const std::filesystem::path& stem) {
  const json header = read_json(json_path(stem));
  EnvelopeFeatures f;
  try {
    f.frame_rate_hz = header.at("frame_rate_hz").get<double>();
    const std::size_t frames = header.at("num_frames").get<std::size_t>();
    const std::size_t channels = header.at("num_channels").get<std::size_t>();
    const auto blob = read_blob<float>(stem.parent_path() / header.at("data_file").get<std::string>(),
                                       frames * channels);
    f.data = Matrix(frames, channels);
    for (std::size_t i = 0; i < blob.size(); ++i) f.data.v[i] = blob[i];
  } catch (const json::exception& e) {
    throw io_error("bad features header " + json_path(stem).string() + ": " + e.what());
  }
  return f;
}

void save_manifest(const std::filesystem::path& path, const TranscriptManifest& manifest) {
  json stories = json::array();
  for (const StoryTranscript& story : manifest.stories) {
    json sentences = json::array();
    for (const SentenceWindow& s : story.sentences)
      sentences.push_back({{"text", s.text}, {"start_s", s.start_s}, {"end_s", s.end_s}});
    stories.push_back({{"story_id", story.story_id}, {"sentences", sentences}});
  }
  write_json(path, json{{"stories", stories}});
}

TranscriptManifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json(path);
  TranscriptManifest manifest;
  try {
    for (const json& js : j.at("stories")) {
      StoryTranscript story;
      story.story_id = js.at("story_id").get<std::string>();
      for (const json& jsent : js.at("sentences")) {
        SentenceWindow w;
        w.text = jsent.at("text").get<std::string>();
        w.start_s = jsent.at("start_s").get<double>();
        w.end_s = jsent.at("end_s").get<double>();
        story.sentences.push_back(std::move(w));
      }
      manifest.stories.push_back(std::move(story));
    }
  } catch (const json::exception& e) {
    throw io_error("bad manifest " + path.string() + ": " + e.what());
  }
  validate(manifest);
  return manifest;
}

void save_adapter(const std::filesystem::path& stem, const AdapterParams& params,
                  const TrainingConfig* config) {
  json header = {
      {"channels", params.channels},
      {"hidden", params.hidden},
      {"embedding_dim", params.dim},
      {"blocks", {"w_input", "w_recur", "bias", "w_proj", "b_proj"}},
      {"data_file", bin_path(stem.filename()).string()},
  };
  if (config) {
    header["seed"] = config->seed;
    header["config"] = {{"alpha", config->alpha},
                        {"tau", config->tau},
                        {"margin", config->margin},
                        {"learning_rate", config->learning_rate},
                        {"batch_size", config->batch_size},
                        {"epochs", config->epochs},
                        {"hidden", config->hidden},
                        {"adam_beta1", config->adam_beta1},
                        {"adam_beta2", config->adam_beta2},
                        {"adam_eps", config->adam_eps}};
  }
  write_json(json_path(stem), header);

  std::vector<double> blob;
  blob.reserve(params.w_input.v.size() + params.w_recur.v.size() + params.bias.size() +
               params.w_proj.v.size() + params.b_proj.size());
  auto append = [&blob](const std::vector<double>& v) { blob.insert(blob.end(), v.begin(), v.end()); };
  append(params.w_input.v);
  append(params.w_recur.v);
  append(params.bias);
  append(params.w_proj.v);
  append(params.b_proj);
  write_blob(bin_path(stem), blob);
}

AdapterParams load_adapter(const std::filesystem::path& stem) {
  const json header = read_json(json_path(stem));
  AdapterParams p;
  try {
    p.channels = header.at("channels").get<std::size_t>();
    p.hidden = header.at("hidden").get<std::size_t>();
    p.dim = header.at("embedding_dim").get<std::size_t>();
    const std::size_t h4 = 4 * p.hidden;
    const std::size_t count =
        h4 * p.channels + h4 * p.hidden + h4 + p.dim * p.hidden + p.dim;
    const auto blob = read_blob<double>(
        stem.parent_path() / header.at("data_file").get<std::string>(), count);

    std::size_t at = 0;
    auto take_matrix = [&](std::size_t r, std::size_t c) {
      Matrix m(r, c);
      std::memcpy(m.v.data(), blob.data() + at, r * c * sizeof(double));
      at += r * c;
      return m;
    };
    auto take_vector = [&](std::size_t n) {
      std::vector<double> v(blob.begin() + static_cast<std::ptrdiff_t>(at),
                            blob.begin() + static_cast<std::ptrdiff_t>(at + n));
      at += n;
      return v;
    };
    p.w_input = take_matrix(h4, p.channels);
    p.w_recur = take_matrix(h4, p.hidden);
    p.bias = take_vector(h4);
    p.w_proj = take_matrix(p.dim, p.hidden);
    p.b_proj = take_vector(p.dim);
  } catch (const json::exception& e) {
    throw io_error("bad adapter header " + json_path(stem).string() + ": " + e.what());
  }
  return p;
}

void save_calibration(const std::filesystem::path& stem, const CalibrationMap& map) {
  json header = {
      {"dim", map.bias.size()},
      {"lambda", map.lambda},
      {"blocks", {"m", "bias"}},
      {"data_file", bin_path(stem.filename()).string()},
  };
  write_json(json_path(stem), header);
  std::vector<double> blob = map.m.v;
  blob.insert(blob.end(), map.bias.begin(), map.bias.end());
  write_blob(bin_path(stem), blob);
}

CalibrationMap load_calibration(const std::filesystem::path& stem) {
  const json header = read_json(json_path(stem));
  CalibrationMap map;
  try {
    const std::size_t dim = header.at("dim").get<std::size_t>();
    map.lambda = header.at("lambda").get<double>();
    const auto blob = read_blob<double>(
        stem.parent_path() / header.at("data_file").get<std::string>(), dim * dim + dim);
    map.m = Matrix(dim, dim);
    std::memcpy(map.m.v.data(), blob.data(), dim * dim * sizeof(double));
    map.bias.assign(blob.begin() + static_cast<std::ptrdiff_t>(dim * dim), blob.end());
  } catch (const json::exception& e) {
    throw io_error("bad calibration header " + json_path(stem).string() + ": " + e.what());
  }
  return map;
}

void save_encoding(const std::filesystem::path& stem, const EncodingModel& model) {
  json header = {
      {"lags", model.lags},
      {"embedding_dim", model.dim},
      {"channels", model.channels},
      {"lambda", model.lambda},
      {"blocks", {"weights", "variance"}},
      {"data_file", bin_path(stem.filename()).string()},
  };
  write_json(json_path(stem), header);
  std::vector<double> blob = model.weights.v;
  blob.insert(blob.end(), model.variance.begin(), model.variance.end());
  write_blob(bin_path(stem), blob);
}

EncodingModel load_encoding(const std::filesystem::path& stem) {
  const json header = read_json(json_path(stem));
  EncodingModel model;
  try {
    model.lags = header.at("lags").get<std::vector<int>>();
    model.dim = header.at("embedding_dim").get<std::size_t>();
    model.channels = header.at("channels").get<std::size_t>();
    model.lambda = header.at("lambda").get<double>();
    const std::size_t wcount = model.lags.size() * model.dim * model.channels;
    const auto blob = read_blob<double>(
        stem.parent_path() / header.at("data_file").get<std::string>(), wcount + model.channels);
    model.weights = Matrix(model.lags.size() * model.dim, model.channels);
    std::memcpy(model.weights.v.data(), blob.data(), wcount * sizeof(double));
    model.variance.assign(blob.begin() + static_cast<std::ptrdiff_t>(wcount), blob.end());
  } catch (const json::exception& e) {
    throw io_error("bad encoding header " + json_path(stem).string() + ": " + e.what());
  }
  return model;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  json sentences = json::array();
  for (const TruthSentence& s : truth.sentences)
    sentences.push_back({{"story_id", s.story_id},
                         {"index", s.index},
                         {"text", s.text},
                         {"embedding", s.embedding.values}});
  json mixing = json::array();
  for (std::size_t ch = 0; ch < truth.mixing.rows; ++ch)
    mixing.push_back(std::vector<double>(truth.mixing.row(ch), truth.mixing.row(ch) + truth.mixing.cols));
  write_json(path, json{{"sentences", sentences},
                        {"mixing", mixing},
                        {"carrier_hz", truth.carrier_hz},
                        {"carrier_phase", truth.carrier_phase},
                        {"noise_seed", truth.noise_seed}});
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  const json j = read_json(path);
  GroundTruth truth;
  try {
    for (const json& js : j.at("sentences")) {
      TruthSentence s;
      s.story_id = js.at("story_id").get<std::string>();
      s.index = js.at("index").get<std::size_t>();
      s.text = js.at("text").get<std::string>();
      s.embedding.values = js.at("embedding").get<std::vector<double>>();
      truth.sentences.push_back(std::move(s));
    }
    const auto mixing = j.at("mixing").get<std::vector<std::vector<double>>>();
    if (!mixing.empty()) {
      truth.mixing = Matrix(mixing.size(), mixing[0].size());
      for (std::size_t ch = 0; ch < mixing.size(); ++ch)
        std::copy(mixing[ch].begin(), mixing[ch].end(), truth.mixing.row(ch));
    }
    truth.carrier_hz = j.at("carrier_hz").get<std::vector<double>>();
    truth.carrier_phase = j.at("carrier_phase").get<std::vector<double>>();
    truth.noise_seed = j.at("noise_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw io_error("bad ground truth " + path.string() + ": " + e.what());
  }
  return truth;
}

}  // namespace neurotext
