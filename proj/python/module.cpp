#include "neurotext/adapter.hpp"
#include "neurotext/baseline.hpp"
#include "neurotext/corrector.hpp"
#include "neurotext/metrics.hpp"
#include "neurotext/signal.hpp"
#include "neurotext/synthdata.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace neurotext;

namespace {

Matrix matrix_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + m.v.size(), m.v.begin());
  return m;
}

py::array_t<double> array_from_matrix(const Matrix& m) {
  py::array_t<double> out({m.rows, m.cols});
  std::copy(m.v.begin(), m.v.end(), out.mutable_data());
  return out;
}

py::array_t<double> array_from_vector(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Embedding embedding_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  Embedding e;
  e.values.assign(a.data(), a.data() + a.shape(0));
  return e;
}

EmbedderConfig embedder_config(std::size_t dim, std::uint64_t hash_seed) {
  EmbedderConfig cfg;
  cfg.dim = dim;
  cfg.hash_seed = hash_seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(neurotext, m) {
  m.doc() = "two-phase neural-to-text decoding: envelope features, contrastive "
            "alignment, embedding inversion and evaluation metrics";

  const EmbedderConfig defaults;

  m.def(
      "normalize_text", [](const std::string& text) { return normalize_text(text); },
      py::arg("text"));

  m.def(
      "embed",
      [defaults](const std::string& text, std::size_t dim, std::uint64_t hash_seed) {
        return array_from_vector(embed(text, embedder_config(dim, hash_seed)).values);
      },
      py::arg("text"), py::arg("dim") = defaults.dim, py::arg("hash_seed") = defaults.hash_seed);

  m.def(
      "cosine",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
        return cosine(embedding_from_array(a), embedding_from_array(b));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "bandpass_hilbert_envelope",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data,
         double sample_rate_hz, double low_hz, double high_hz) {
        RawRecording rec;
        rec.sample_rate_hz = sample_rate_hz;
        rec.data = matrix_from_array(data);
        rec.channel_ids.resize(rec.data.cols, "ch");
        return array_from_matrix(bandpass_hilbert_envelope(rec, low_hz, high_hz).data);
      },
      py::arg("data"), py::arg("sample_rate_hz"), py::arg("low_hz") = 70.0,
      py::arg("high_hz") = 150.0,
      "Per-channel band-limited analytic-signal magnitude of a samples x channels array.");

  m.def(
      "downsample",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data,
         double sample_rate_hz, double target_hz) {
        RawRecording rec;
        rec.sample_rate_hz = sample_rate_hz;
        rec.data = matrix_from_array(data);
        rec.channel_ids.resize(rec.data.cols, "ch");
        return array_from_matrix(downsample(rec, target_hz).data);
      },
      py::arg("data"), py::arg("sample_rate_hz"), py::arg("target_hz") = 100.0);

  m.def("bleu", &bleu, py::arg("candidate"), py::arg("reference"));

  m.def(
      "semantic_score",
      [defaults](const std::string& candidate, const std::string& reference, std::size_t dim,
                 std::uint64_t hash_seed) {
        return semantic_score(candidate, reference, embedder_config(dim, hash_seed));
      },
      py::arg("candidate"), py::arg("reference"), py::arg("dim") = defaults.dim,
      py::arg("hash_seed") = defaults.hash_seed);

  m.def(
      "paired_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return paired_t_test(a, b);
      },
      py::arg("a"), py::arg("b"), "Two-sided p-value.");

  m.def(
      "invert",
      [defaults](const py::array_t<double, py::array::c_style | py::array::forcecast>& target,
                 const std::vector<std::string>& words, std::size_t max_len,
                 std::size_t beam_width, std::size_t max_steps, std::uint64_t hash_seed) {
        const Embedding e = embedding_from_array(target);
        InvertConfig cfg;
        cfg.max_len = max_len;
        cfg.beam_width = beam_width;
        cfg.max_steps = max_steps;
        const Hypothesis hyp =
            invert(e, Vocabulary::from_words(words), cfg, embedder_config(e.dim(), hash_seed));
        std::string text;
        for (std::size_t i = 0; i < hyp.tokens.size(); ++i) {
          if (i) text.push_back(' ');
          text += hyp.tokens[i];
        }
        return py::make_tuple(text, hyp.score);
      },
      py::arg("target"), py::arg("words"), py::arg("max_len") = 12, py::arg("beam_width") = 8,
      py::arg("max_steps") = 16, py::arg("hash_seed") = defaults.hash_seed,
      "Beam-search inversion of an embedding back to text; returns (text, cosine).");

  py::class_<AdapterParams>(m, "Adapter")
      .def_property_readonly("channels", [](const AdapterParams& p) { return p.channels; })
      .def_property_readonly("hidden", [](const AdapterParams& p) { return p.hidden; })
      .def_property_readonly("dim", [](const AdapterParams& p) { return p.dim; })
      .def(
          "forward",
          [](const AdapterParams& p,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& features) {
            return array_from_vector(adapter_forward(p, matrix_from_array(features)).values);
          },
          py::arg("features"), "Embed one frames x channels segment.");

  m.def(
      "train_adapter",
      [](const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& segments,
         const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& targets,
         std::size_t hidden, std::size_t epochs, std::size_t batch_size, double learning_rate,
         double alpha, double tau, double margin, std::uint64_t seed) {
        if (segments.size() != targets.size())
          throw std::invalid_argument("segments and targets must pair up");
        std::vector<SentenceSegment> segs;
        std::vector<Embedding> targs;
        for (std::size_t i = 0; i < segments.size(); ++i) {
          SentenceSegment s;
          s.story_id = "py";
          s.index = i;
          s.text = "segment " + std::to_string(i);
          s.features = matrix_from_array(segments[i]);
          segs.push_back(std::move(s));
          targs.push_back(embedding_from_array(targets[i]));
        }
        TrainingConfig cfg;
        cfg.hidden = hidden;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.learning_rate = learning_rate;
        cfg.alpha = alpha;
        cfg.tau = tau;
        cfg.margin = margin;
        cfg.seed = seed;
        TrainResult result = train_adapter(segs, targs, cfg);
        return py::make_tuple(std::move(result.params), result.loss_curve);
      },
      py::arg("segments"), py::arg("targets"), py::arg("hidden") = 32, py::arg("epochs") = 100,
      py::arg("batch_size") = 8, py::arg("learning_rate") = 1.3e-3, py::arg("alpha") = 0.25,
      py::arg("tau") = 0.1, py::arg("margin") = 1.0, py::arg("seed") = 0,
      "Returns (Adapter, per-epoch loss curve).");

  py::class_<CalibrationMap>(m, "Calibration")
      .def(
          "apply",
          [](const CalibrationMap& map,
             const py::array_t<double, py::array::c_style | py::array::forcecast>& e) {
            return array_from_vector(apply_calibration(map, embedding_from_array(e)).values);
          },
          py::arg("embedding"));

  m.def(
      "calibrate",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& neural,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& text,
         double lam) { return calibrate(matrix_from_array(neural), matrix_from_array(text), lam); },
      py::arg("neural"), py::arg("text"), py::arg("lambda") = 1e-3,
      "Ridge-fit affine map from neural embeddings onto text embeddings.");

  m.def("identity_calibration", &identity_calibration, py::arg("dim") = 64);

  m.def(
      "generate_corpus",
      [](std::size_t num_stories, std::size_t sentences_per_story, std::size_t channels,
         double snr_db, bool noiseless, std::uint64_t seed) {
        SynthConfig cfg;
        cfg.num_stories = num_stories;
        cfg.sentences_per_story = sentences_per_story;
        cfg.channels = channels;
        cfg.snr_db = snr_db;
        cfg.noiseless = noiseless;
        cfg.seed = seed;
        const SynthCorpus corpus = generate(cfg);
        py::list stories;
        for (std::size_t s = 0; s < corpus.recordings.size(); ++s) {
          py::dict story;
          story["story_id"] = corpus.story_ids[s];
          story["sample_rate_hz"] = corpus.recordings[s].sample_rate_hz;
          story["data"] = array_from_matrix(corpus.recordings[s].data);
          py::list sentences;
          for (const SentenceWindow& w : corpus.manifest.stories[s].sentences) {
            py::dict sent;
            sent["text"] = w.text;
            sent["start_s"] = w.start_s;
            sent["end_s"] = w.end_s;
            sentences.append(sent);
          }
          story["sentences"] = sentences;
          stories.append(story);
        }
        return stories;
      },
      py::arg("num_stories") = 6, py::arg("sentences_per_story") = 20, py::arg("channels") = 64,
      py::arg("snr_db") = 10.0, py::arg("noiseless") = false, py::arg("seed") = 0,
      "Seeded synthetic corpus as a list of story dicts.");
}
