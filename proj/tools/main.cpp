#include "neurotext/experiment.hpp"
#include "neurotext/io.hpp"
#include "neurotext/rng.hpp"
#include "neurotext/signal.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace neurotext;

namespace {

// exit codes: 0 success, 2 invalid config, 3 numerical divergence, 4 I/O
constexpr int kOk = 0;
constexpr int kInvalidConfig = 2;
constexpr int kDiverged = 3;
constexpr int kIoError = 4;

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";
};

template <class T>
void read_field(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

ExperimentPlan plan_from_config(const GlobalOptions& opts) {
  ExperimentPlan plan;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw io_error("cannot open config " + opts.config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("config " + opts.config_path + " is not valid JSON: " + e.what());
    }
    try {
      if (j.contains("synth")) {
        const json& s = j["synth"];
        read_field(s, "num_stories", plan.synth.num_stories);
        read_field(s, "sentences_per_story", plan.synth.sentences_per_story);
        read_field(s, "channels", plan.synth.channels);
        read_field(s, "sample_rate_hz", plan.synth.sample_rate_hz);
        read_field(s, "snr_db", plan.synth.snr_db);
        read_field(s, "noiseless", plan.synth.noiseless);
        read_field(s, "word_duration_s", plan.synth.word_duration_s);
        read_field(s, "sentence_gap_s", plan.synth.sentence_gap_s);
        read_field(s, "lead_in_s", plan.synth.lead_in_s);
        read_field(s, "carrier_base", plan.synth.carrier_base);
        read_field(s, "carrier_gain", plan.synth.carrier_gain);
        read_field(s, "carrier_low_hz", plan.synth.carrier_low_hz);
        read_field(s, "carrier_high_hz", plan.synth.carrier_high_hz);
        read_field(s, "embedding_dim", plan.synth.embedder.dim);
        read_field(s, "hash_seed", plan.synth.embedder.hash_seed);
        if (s.contains("grammar")) {
          const json& g = s["grammar"];
          read_field(g, "subjects", plan.synth.grammar.subjects);
          read_field(g, "verbs", plan.synth.grammar.verbs);
          read_field(g, "objects", plan.synth.grammar.objects);
          read_field(g, "modifiers", plan.synth.grammar.modifiers);
        }
      }
      if (j.contains("training")) {
        const json& t = j["training"];
        read_field(t, "alpha", plan.training.alpha);
        read_field(t, "tau", plan.training.tau);
        read_field(t, "margin", plan.training.margin);
        read_field(t, "learning_rate", plan.training.learning_rate);
        read_field(t, "batch_size", plan.training.batch_size);
        read_field(t, "epochs", plan.training.epochs);
        read_field(t, "hidden", plan.training.hidden);
        read_field(t, "adam_beta1", plan.training.adam_beta1);
        read_field(t, "adam_beta2", plan.training.adam_beta2);
        read_field(t, "adam_eps", plan.training.adam_eps);
      }
      if (j.contains("invert")) {
        const json& i = j["invert"];
        read_field(i, "max_len", plan.invert.max_len);
        read_field(i, "beam_width", plan.invert.beam_width);
        read_field(i, "max_steps", plan.invert.max_steps);
      }
      if (j.contains("baseline_search")) {
        const json& b = j["baseline_search"];
        read_field(b, "beam_width", plan.baseline_search.beam_width);
        read_field(b, "proposals", plan.baseline_search.proposals);
        read_field(b, "max_len", plan.baseline_search.max_len);
      }
      if (j.contains("experiment")) {
        const json& e = j["experiment"];
        read_field(e, "band_low_hz", plan.band_low_hz);
        read_field(e, "band_high_hz", plan.band_high_hz);
        read_field(e, "frame_rate_hz", plan.frame_rate_hz);
        read_field(e, "calibration_lambda", plan.calibration_lambda);
        read_field(e, "encoding_lambda", plan.encoding_lambda);
        read_field(e, "lags", plan.lags);
        read_field(e, "lm_smoothing", plan.lm_smoothing);
        read_field(e, "test_fraction", plan.test_fraction);
        read_field(e, "fractions", plan.fractions);
        read_field(e, "repeats", plan.repeats);
        read_field(e, "threads", plan.threads);
        read_field(e, "seed", plan.seed);
      }
    } catch (const json::exception& e) {
      throw std::invalid_argument("config field error: " + std::string(e.what()));
    }
  }
  if (opts.seed_set) plan.seed = opts.seed;
  return plan;
}

json plan_to_json(const ExperimentPlan& plan) {
  return json{
      {"synth",
       {{"num_stories", plan.synth.num_stories},
        {"sentences_per_story", plan.synth.sentences_per_story},
        {"channels", plan.synth.channels},
        {"sample_rate_hz", plan.synth.sample_rate_hz},
        {"snr_db", plan.synth.snr_db},
        {"noiseless", plan.synth.noiseless},
        {"word_duration_s", plan.synth.word_duration_s},
        {"sentence_gap_s", plan.synth.sentence_gap_s},
        {"lead_in_s", plan.synth.lead_in_s},
        {"carrier_base", plan.synth.carrier_base},
        {"carrier_gain", plan.synth.carrier_gain},
        {"carrier_low_hz", plan.synth.carrier_low_hz},
        {"carrier_high_hz", plan.synth.carrier_high_hz},
        {"embedding_dim", plan.synth.embedder.dim},
        {"hash_seed", plan.synth.embedder.hash_seed},
        {"grammar",
         {{"subjects", plan.synth.grammar.subjects},
          {"verbs", plan.synth.grammar.verbs},
          {"objects", plan.synth.grammar.objects},
          {"modifiers", plan.synth.grammar.modifiers}}}}},
      {"training",
       {{"alpha", plan.training.alpha},
        {"tau", plan.training.tau},
        {"margin", plan.training.margin},
        {"learning_rate", plan.training.learning_rate},
        {"batch_size", plan.training.batch_size},
        {"epochs", plan.training.epochs},
        {"hidden", plan.training.hidden},
        {"adam_beta1", plan.training.adam_beta1},
        {"adam_beta2", plan.training.adam_beta2},
        {"adam_eps", plan.training.adam_eps}}},
      {"invert",
       {{"max_len", plan.invert.max_len},
        {"beam_width", plan.invert.beam_width},
        {"max_steps", plan.invert.max_steps}}},
      {"baseline_search",
       {{"beam_width", plan.baseline_search.beam_width},
        {"proposals", plan.baseline_search.proposals},
        {"max_len", plan.baseline_search.max_len}}},
      {"experiment",
       {{"band_low_hz", plan.band_low_hz},
        {"band_high_hz", plan.band_high_hz},
        {"frame_rate_hz", plan.frame_rate_hz},
        {"calibration_lambda", plan.calibration_lambda},
        {"encoding_lambda", plan.encoding_lambda},
        {"lags", plan.lags},
        {"lm_smoothing", plan.lm_smoothing},
        {"test_fraction", plan.test_fraction},
        {"fractions", plan.fractions},
        {"repeats", plan.repeats},
        {"threads", plan.threads},
        {"seed", plan.seed}}},
  };
}

void write_run_json(const fs::path& out_dir, const std::string& command,
                    const ExperimentPlan& plan) {
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "run.json");
  if (!out) throw io_error("cannot write run.json in " + out_dir.string());
  out << json{{"command", command},
              {"seed", plan.seed},
              {"out", out_dir.string()},
              {"config", plan_to_json(plan)}}
             .dump(2)
      << "\n";
}

struct LoadedData {
  TranscriptManifest manifest;
  std::vector<std::string> story_ids;
  std::vector<EnvelopeFeatures> features;  // parallel to story_ids
};

LoadedData load_features_dir(const fs::path& dir) {
  LoadedData data;
  data.manifest = load_manifest(dir / "manifest.json");
  for (const StoryTranscript& story : data.manifest.stories) {
    data.story_ids.push_back(story.story_id);
    data.features.push_back(load_features(dir / ("features_" + story.story_id)));
  }
  return data;
}

int cmd_synth(const GlobalOptions& opts) {
  ExperimentPlan plan = plan_from_config(opts);
  SynthConfig cfg = plan.synth;
  cfg.seed = plan.seed;
  const SynthCorpus corpus = generate(cfg);

  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  for (std::size_t s = 0; s < corpus.recordings.size(); ++s)
    save_recording(out / ("story_" + corpus.story_ids[s]), corpus.recordings[s]);
  save_manifest(out / "manifest.json", corpus.manifest);
  save_ground_truth(out / "ground_truth.json", corpus.truth);
  write_run_json(out, "synth", plan);
  std::cout << "wrote " << corpus.recordings.size() << " stories to " << out.string() << "\n";
  return kOk;
}

int cmd_preprocess(const GlobalOptions& opts, const std::string& data_dir) {
  const ExperimentPlan plan = plan_from_config(opts);
  const fs::path in(data_dir), out(opts.out_dir);
  const TranscriptManifest manifest = load_manifest(in / "manifest.json");
  fs::create_directories(out);
  for (const StoryTranscript& story : manifest.stories) {
    const RawRecording rec = load_recording(in / ("story_" + story.story_id));
    const RawRecording env = bandpass_hilbert_envelope(rec, plan.band_low_hz, plan.band_high_hz);
    save_features(out / ("features_" + story.story_id), downsample(env, plan.frame_rate_hz));
  }
  save_manifest(out / "manifest.json", manifest);
  write_run_json(out, "preprocess", plan);
  std::cout << "preprocessed " << manifest.stories.size() << " stories into " << out.string()
            << "\n";
  return kOk;
}

int cmd_train(const GlobalOptions& opts, const std::string& data_dir) {
  ExperimentPlan plan = plan_from_config(opts);
  const LoadedData data = load_features_dir(data_dir);

  std::vector<SentenceSegment> segments;
  std::vector<Embedding> targets;
  for (std::size_t s = 0; s < data.story_ids.size(); ++s) {
    auto story_segments = segment_by_sentence(data.features[s], data.manifest, data.story_ids[s]);
    for (auto& seg : story_segments) {
      targets.push_back(embed(seg.text, plan.synth.embedder));
      segments.push_back(std::move(seg));
    }
  }

  TrainingConfig cfg = plan.training;
  cfg.seed = plan.seed;
  const TrainResult trained = train_adapter(segments, targets, cfg);

  Matrix neural(segments.size(), plan.synth.embedder.dim);
  Matrix text(segments.size(), plan.synth.embedder.dim);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Embedding e = adapter_forward(trained.params, segments[i].features);
    std::copy(e.values.begin(), e.values.end(), neural.row(i));
    std::copy(targets[i].values.begin(), targets[i].values.end(), text.row(i));
  }
  const CalibrationMap map = calibrate(neural, text, plan.calibration_lambda);

  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  save_adapter(out / "adapter", trained.params, &cfg);
  save_calibration(out / "calibration", map);
  write_run_json(out, "train", plan);
  std::cout << "trained on " << segments.size() << " sentences; final epoch loss "
            << trained.loss_curve.back() << "\n";
  return kOk;
}

int cmd_decode(const GlobalOptions& opts, const std::string& data_dir,
               const std::string& model_dir, const std::string& story_filter) {
  const ExperimentPlan plan = plan_from_config(opts);
  const LoadedData data = load_features_dir(data_dir);
  const AdapterParams params = load_adapter(fs::path(model_dir) / "adapter");
  const CalibrationMap map = load_calibration(fs::path(model_dir) / "calibration");

  std::vector<std::string> corpus_texts;
  for (const StoryTranscript& story : data.manifest.stories)
    for (const SentenceWindow& w : story.sentences) corpus_texts.push_back(w.text);
  const Vocabulary vocab = Vocabulary::from_corpus(corpus_texts);

  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  std::ofstream csv(out / "decoded.csv");
  if (!csv) throw io_error("cannot write decoded.csv");
  csv << "story_id,sentence_index,reference,decoded,score\n";

  std::size_t count = 0;
  for (std::size_t s = 0; s < data.story_ids.size(); ++s) {
    if (!story_filter.empty() && data.story_ids[s] != story_filter) continue;
    const auto segments = segment_by_sentence(data.features[s], data.manifest, data.story_ids[s]);
    for (const SentenceSegment& seg : segments) {
      const DecodeResult res =
          decode(params, map, seg.features, vocab, plan.invert, plan.synth.embedder);
      csv << seg.story_id << ',' << seg.index << ',' << seg.text << ',' << res.text << ','
          << res.score << "\n";
      ++count;
    }
  }
  write_run_json(out, "decode", plan);
  std::cout << "decoded " << count << " sentences into " << (out / "decoded.csv").string() << "\n";
  return kOk;
}

int cmd_baseline(const GlobalOptions& opts, const std::string& data_dir) {
  const ExperimentPlan plan = plan_from_config(opts);
  const LoadedData data = load_features_dir(data_dir);
  const std::size_t dim = plan.synth.embedder.dim;

  std::vector<std::string> texts;
  std::size_t total_frames = 0;
  for (const EnvelopeFeatures& f : data.features) total_frames += f.num_frames();

  Matrix design(total_frames, plan.lags.size() * dim);
  Matrix responses(total_frames, data.features[0].num_channels());
  std::size_t at = 0;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> spans_by_story;
  for (std::size_t s = 0; s < data.story_ids.size(); ++s) {
    const StoryTranscript& story = data.manifest.stories[s];
    std::vector<StimulusSpan> spans;
    std::vector<std::pair<std::size_t, std::size_t>> frame_spans;
    for (const SentenceWindow& w : story.sentences) {
      const std::size_t lo = frame_floor(w.start_s, plan.frame_rate_hz);
      const std::size_t hi =
          std::min(frame_ceil(w.end_s, plan.frame_rate_hz), data.features[s].num_frames());
      spans.push_back(StimulusSpan{embed(w.text, plan.synth.embedder), lo, hi});
      frame_spans.emplace_back(lo, hi);
      texts.push_back(w.text);
    }
    spans_by_story.push_back(std::move(frame_spans));
    const Matrix story_design = build_design(spans, data.features[s].num_frames(), plan.lags, dim);
    for (std::size_t r = 0; r < story_design.rows; ++r) {
      std::copy(story_design.row(r), story_design.row(r) + story_design.cols, design.row(at + r));
      std::copy(data.features[s].data.row(r), data.features[s].data.row(r) + responses.cols,
                responses.row(at + r));
    }
    at += story_design.rows;
  }

  const EncodingModel model = fit_encoding(design, responses, plan.encoding_lambda, plan.lags, dim);
  const NgramLM lm = fit_bigram_lm(texts, plan.lm_smoothing);

  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  save_encoding(out / "encoding", model);
  std::ofstream csv(out / "baseline.csv");
  if (!csv) throw io_error("cannot write baseline.csv");
  csv << "story_id,sentence_index,reference,decoded,log_likelihood\n";
  for (std::size_t s = 0; s < data.story_ids.size(); ++s) {
    const StoryTranscript& story = data.manifest.stories[s];
    for (std::size_t i = 0; i < story.sentences.size(); ++i) {
      const auto [lo, hi] = spans_by_story[s][i];
      const BaselineDecodeResult res = beam_decode(model, data.features[s].data, lo, hi, lm,
                                                   plan.baseline_search, plan.synth.embedder);
      csv << story.story_id << ',' << i << ',' << story.sentences[i].text << ',' << res.text << ','
          << res.log_likelihood << "\n";
    }
  }
  write_run_json(out, "baseline", plan);
  std::cout << "baseline decoded into " << (out / "baseline.csv").string() << "\n";
  return kOk;
}

int cmd_evaluate(const GlobalOptions& opts, const std::string& decoded_csv) {
  const ExperimentPlan plan = plan_from_config(opts);
  std::ifstream in(decoded_csv);
  if (!in) throw io_error("cannot open " + decoded_csv);

  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::invalid_argument("evaluate: column '" + name + "' missing from " + decoded_csv);
  };
  const std::size_t ref_col = column("reference");
  const std::size_t dec_col = column("decoded");

  std::vector<SentenceScore> scores;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() <= std::max(ref_col, dec_col)) continue;
    SentenceScore s;
    s.bleu = bleu(fields[dec_col], fields[ref_col]);
    s.semantic = semantic_score(fields[dec_col], fields[ref_col], plan.synth.embedder);
    scores.push_back(s);
  }
  const ScoreReport report = make_report(std::move(scores));

  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  {
    std::ofstream csv(out / "scores.csv");
    if (!csv) throw io_error("cannot write scores.csv");
    csv << "sentence,bleu,semantic\n";
    for (std::size_t i = 0; i < report.sentences.size(); ++i)
      csv << i << ',' << report.sentences[i].bleu << ',' << report.sentences[i].semantic << "\n";
  }
  {
    std::ofstream js(out / "summary.json");
    if (!js) throw io_error("cannot write summary.json");
    js << json{{"n", report.sentences.size()},
               {"bleu_mean", report.bleu_mean},
               {"bleu_sd", report.bleu_sd},
               {"semantic_mean", report.semantic_mean},
               {"semantic_sd", report.semantic_sd}}
              .dump(2)
       << "\n";
  }
  write_run_json(out, "evaluate", plan);
  std::cout << "bleu " << report.bleu_mean << " +- " << report.bleu_sd << ", semantic "
            << report.semantic_mean << " +- " << report.semantic_sd << "\n";
  return kOk;
}

int cmd_gradcheck(const GlobalOptions& opts) {
  const ExperimentPlan plan = plan_from_config(opts);
  Rng rng(derive_seed(plan.seed, 0x6C));
  std::vector<SentenceSegment> segments;
  std::vector<Embedding> targets;
  for (std::size_t i = 0; i < 4; ++i) {
    SentenceSegment seg;
    seg.story_id = "g";
    seg.index = i;
    seg.text = "g" + std::to_string(i);
    seg.features = Matrix(1 + rng.below(5), 3);
    for (double& v : seg.features.v) v = rng.normal();
    segments.push_back(std::move(seg));
    Embedding e;
    e.values.resize(8);
    double n = 0.0;
    for (double& v : e.values) {
      v = rng.normal();
      n += v * v;
    }
    n = std::sqrt(n);
    for (double& v : e.values) v /= n;
    targets.push_back(std::move(e));
  }
  TrainingConfig cfg = plan.training;
  cfg.hidden = 4;
  const AdapterParams params = init_adapter(3, 4, 8, plan.seed);
  const GradCheckReport report = grad_check(params, segments, targets, cfg);
  for (const auto& block : report.blocks)
    std::cout << block.name << ": max rel err " << block.max_rel_err << "\n";
  std::cout << "max: " << report.max_rel_err << "\n";
  write_run_json(opts.out_dir, "gradcheck", plan);
  return report.max_rel_err < 1e-4 ? kOk : kDiverged;
}

int run_experiment_command(const GlobalOptions& opts, const std::string& command,
                           const std::string& axis) {
  const ExperimentPlan plan = plan_from_config(opts);
  ExperimentResult result;
  if (command == "cv") {
    result = run_cv(plan);
  } else if (command == "ablation") {
    result = run_ablation(plan);
  } else if (command == "ood") {
    result = run_out_of_domain(plan);
  } else {
    result = run_scaling(plan, axis == "electrodes" ? ScalingAxis::electrodes : ScalingAxis::data);
  }
  const fs::path out(opts.out_dir);
  emit_report(result, out);
  write_run_json(out, command, plan);

  for (const auto& [variant, report] : result.pooled) {
    std::cout << variant << ": semantic " << report.semantic_mean << " +- " << report.semantic_sd
              << ", bleu " << report.bleu_mean << " +- " << report.bleu_sd;
    if (report.p_vs_other) std::cout << ", p vs random " << *report.p_vs_other;
    std::cout << "\n";
  }
  if (!result.scaling.empty()) {
    std::map<double, std::vector<double>> by_fraction;
    for (const ScalingPoint& p : result.scaling)
      by_fraction[p.fraction].push_back(p.report.semantic_mean);
    for (const auto& [fraction, values] : by_fraction)
      std::cout << "fraction " << fraction << ": semantic " << mean(values) << " +- "
                << sample_sd(values) << "\n";
  }
  std::cout << "report written to " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-phase neural-to-text decoding sandbox"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "JSON config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", opts.seed, "master seed");
  app.add_option("--out", opts.out_dir, "output directory");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  auto* preprocess = app.add_subcommand("preprocess", "envelope extraction and downsampling");
  std::string pre_data;
  preprocess->add_option("--data", pre_data, "directory from synth")->required();
  auto* train = app.add_subcommand("train", "train the adapter and fit the calibration");
  std::string train_data;
  train->add_option("--data", train_data, "directory from preprocess")->required();
  auto* decode_cmd = app.add_subcommand("decode", "decode sentences with a trained model");
  std::string decode_data, decode_model, decode_story;
  decode_cmd->add_option("--data", decode_data, "directory from preprocess")->required();
  decode_cmd->add_option("--model", decode_model, "directory from train")->required();
  decode_cmd->add_option("--story", decode_story, "restrict to one story id");
  auto* baseline = app.add_subcommand("baseline", "fit and decode the encoding-model baseline");
  std::string baseline_data;
  baseline->add_option("--data", baseline_data, "directory from preprocess")->required();
  auto* evaluate = app.add_subcommand("evaluate", "score a decoded CSV");
  std::string eval_csv;
  evaluate->add_option("--decoded", eval_csv, "CSV with reference and decoded columns")->required();
  auto* cv = app.add_subcommand("cv", "leave-one-story-out cross-validation");
  auto* ablation = app.add_subcommand("ablation", "phase ablation study");
  auto* ood = app.add_subcommand("ood", "out-of-domain evaluation on held-out stories");
  auto* scaling = app.add_subcommand("scaling", "data or electrode scaling sweep");
  std::string axis = "data";
  scaling->add_option("--axis", axis, "data or electrodes")
      ->check(CLI::IsMember({"data", "electrodes"}));
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }
  opts.seed_set = seed_opt->count() > 0;

  try {
    if (synth->parsed()) return cmd_synth(opts);
    if (preprocess->parsed()) return cmd_preprocess(opts, pre_data);
    if (train->parsed()) return cmd_train(opts, train_data);
    if (decode_cmd->parsed()) return cmd_decode(opts, decode_data, decode_model, decode_story);
    if (baseline->parsed()) return cmd_baseline(opts, baseline_data);
    if (evaluate->parsed()) return cmd_evaluate(opts, eval_csv);
    if (cv->parsed()) return run_experiment_command(opts, "cv", axis);
    if (ablation->parsed()) return run_experiment_command(opts, "ablation", axis);
    if (ood->parsed()) return run_experiment_command(opts, "ood", axis);
    if (scaling->parsed()) return run_experiment_command(opts, "scaling", axis);
    if (gradcheck->parsed()) return cmd_gradcheck(opts);
  } catch (const diverged_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
