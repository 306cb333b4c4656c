#include "neurotext/experiment.hpp"

#include "neurotext/rng.hpp"
#include "neurotext/signal.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace neurotext {

namespace {

using nlohmann::json;

enum : std::uint64_t {
  kSynthStream = 0x517,
  kFoldStream = 0xF01D,
  kControlStream = 0xC091,
  kScalingStream = 0x5CA1,
  kTrainStream = 0x7121,
};

struct PreparedStory {
  std::string story_id;
  EnvelopeFeatures features;
  std::vector<SentenceSegment> segments;
  std::vector<Embedding> targets;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // frame spans per sentence
};

struct Prepared {
  std::vector<PreparedStory> stories;
  std::vector<std::string> all_texts;
  Vocabulary vocab;
};

struct SentenceRef {
  std::size_t story = 0;
  std::size_t index = 0;
};

std::string key_of(const Prepared& prep, const SentenceRef& r) {
  return prep.stories[r.story].story_id + ":" + std::to_string(r.index);
}

Prepared prepare(const ExperimentPlan& plan) {
  SynthConfig synth = plan.synth;
  synth.seed = derive_seed(plan.seed, kSynthStream);
  SynthCorpus corpus = generate(synth);

  Prepared prep;
  prep.stories.reserve(corpus.recordings.size());
  for (std::size_t s = 0; s < corpus.recordings.size(); ++s) {
    PreparedStory story;
    story.story_id = corpus.story_ids[s];
    const RawRecording envelope =
        bandpass_hilbert_envelope(corpus.recordings[s], plan.band_low_hz, plan.band_high_hz);
    story.features = downsample(envelope, plan.frame_rate_hz);
    story.segments = segment_by_sentence(story.features, corpus.manifest, story.story_id);
    const StoryTranscript& transcript = corpus.manifest.story(story.story_id);
    for (const SentenceWindow& w : transcript.sentences) {
      story.targets.push_back(embed(w.text, plan.synth.embedder));
      story.spans.emplace_back(frame_floor(w.start_s, plan.frame_rate_hz),
                               std::min(frame_ceil(w.end_s, plan.frame_rate_hz),
                                        story.features.num_frames()));
      prep.all_texts.push_back(w.text);
    }
    prep.stories.push_back(std::move(story));
  }
  prep.vocab = Vocabulary::from_corpus(prep.all_texts);
  return prep;
}

std::size_t test_block_size(const ExperimentPlan& plan, std::size_t n) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(plan.test_fraction * static_cast<double>(n) + 1e-9)));
}

Matrix slice_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows, cols.size());
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(r, cols[c]);
  return out;
}

struct Pipeline {
  AdapterParams adapter;
  CalibrationMap map;
  std::vector<std::vector<std::size_t>> batches;
};

Pipeline build_pipeline(std::span<const SentenceSegment> train_segments,
                        std::span<const Embedding> train_targets, const ExperimentPlan& plan,
                        std::uint64_t seed, bool train_phase1, bool fit_phase2) {
  TrainingConfig cfg = plan.training;
  cfg.seed = seed;
  const std::size_t channels = train_segments[0].features.cols;
  const std::size_t dim = train_targets[0].dim();

  Pipeline pipe;
  if (train_phase1) {
    TrainResult result = train_adapter(train_segments, train_targets, cfg);
    pipe.adapter = std::move(result.params);
    pipe.batches = std::move(result.batches);
  } else {
    pipe.adapter = init_adapter(channels, cfg.hidden, dim, seed);
  }

  if (fit_phase2) {
    Matrix neural(train_segments.size(), dim), text(train_segments.size(), dim);
    for (std::size_t i = 0; i < train_segments.size(); ++i) {
      const Embedding e = adapter_forward(pipe.adapter, train_segments[i].features);
      std::copy(e.values.begin(), e.values.end(), neural.row(i));
      std::copy(train_targets[i].values.begin(), train_targets[i].values.end(), text.row(i));
    }
    pipe.map = calibrate(neural, text, plan.calibration_lambda);
  } else {
    pipe.map = identity_calibration(dim);
  }
  return pipe;
}

std::vector<DecodedSentence> decode_with_pipeline(
    const std::string& variant, const Pipeline& pipe, std::span<const SentenceSegment> segments,
    const Prepared& prep, const ExperimentPlan& plan, std::size_t fold) {
  std::vector<DecodedSentence> rows;
  rows.reserve(segments.size());
  for (const SentenceSegment& seg : segments) {
    const DecodeResult res =
        decode(pipe.adapter, pipe.map, seg.features, prep.vocab, plan.invert, plan.synth.embedder);
    DecodedSentence row;
    row.variant = variant;
    row.fold = fold;
    row.story_id = seg.story_id;
    row.index = seg.index;
    row.reference = seg.text;
    row.decoded = res.text;
    row.bleu = bleu(res.text, seg.text);
    row.semantic = semantic_score(res.text, seg.text, plan.synth.embedder);
    rows.push_back(std::move(row));
  }
  return rows;
}

// Encoding-model baseline over the training region of every story: a story
// that contributes test sentences is truncated just before its first test
// span so no test frame is fitted.
std::vector<DecodedSentence> decode_baseline(const Prepared& prep, const ExperimentPlan& plan,
                                             const std::vector<std::vector<std::size_t>>& test_by_story,
                                             std::span<const std::string> train_texts,
                                             std::size_t fold) {
  const std::size_t dim = plan.synth.embedder.dim;

  std::size_t total_rows = 0;
  std::vector<std::size_t> cuts(prep.stories.size());
  for (std::size_t s = 0; s < prep.stories.size(); ++s) {
    const PreparedStory& story = prep.stories[s];
    std::size_t cut = story.features.num_frames();
    for (std::size_t idx : test_by_story[s]) cut = std::min(cut, story.spans[idx].first);
    if (!test_by_story[s].empty() && test_by_story[s].size() == story.segments.size()) cut = 0;
    cuts[s] = cut;
    total_rows += cut;
  }

  Matrix design(total_rows, plan.lags.size() * dim);
  Matrix responses(total_rows, prep.stories[0].features.num_channels());
  std::size_t at = 0;
  for (std::size_t s = 0; s < prep.stories.size(); ++s) {
    const PreparedStory& story = prep.stories[s];
    const std::size_t cut = cuts[s];
    if (cut == 0) continue;
    std::vector<StimulusSpan> spans;
    for (std::size_t i = 0; i < story.spans.size(); ++i) {
      if (story.spans[i].second > cut) continue;
      spans.push_back(StimulusSpan{story.targets[i], story.spans[i].first, story.spans[i].second});
    }
    const Matrix story_design = build_design(spans, cut, plan.lags, dim);
    for (std::size_t r = 0; r < cut; ++r) {
      std::copy(story_design.row(r), story_design.row(r) + story_design.cols, design.row(at + r));
      std::copy(story.features.data.row(r), story.features.data.row(r) + responses.cols,
                responses.row(at + r));
    }
    at += cut;
  }

  const EncodingModel model = fit_encoding(design, responses, plan.encoding_lambda, plan.lags, dim);
  const NgramLM lm = fit_bigram_lm(train_texts, plan.lm_smoothing);

  std::vector<DecodedSentence> rows;
  for (std::size_t s = 0; s < prep.stories.size(); ++s) {
    const PreparedStory& story = prep.stories[s];
    for (std::size_t idx : test_by_story[s]) {
      const auto [lo, hi] = story.spans[idx];
      const BaselineDecodeResult res = beam_decode(model, story.features.data, lo, hi, lm,
                                                   plan.baseline_search, plan.synth.embedder);
      DecodedSentence row;
      row.variant = "baseline";
      row.fold = fold;
      row.story_id = story.story_id;
      row.index = idx;
      row.reference = story.segments[idx].text;
      row.decoded = res.text;
      row.bleu = bleu(res.text, row.reference);
      row.semantic = semantic_score(res.text, row.reference, plan.synth.embedder);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

ScoreReport report_of(std::span<const DecodedSentence> rows) {
  std::vector<SentenceScore> scores;
  scores.reserve(rows.size());
  for (const DecodedSentence& r : rows) scores.push_back(SentenceScore{r.bleu, r.semantic});
  return make_report(std::move(scores));
}

void attach_p_values(FoldResult& fold) {
  const auto random_it = fold.reports.find("random");
  if (random_it == fold.reports.end()) return;
  const std::vector<double> random_sem = random_it->second.semantic_values();
  for (auto& [variant, report] : fold.reports) {
    if (variant == "random") continue;
    const std::vector<double> sem = report.semantic_values();
    if (sem.size() != random_sem.size()) continue;
    try {
      report.p_vs_other = paired_t_test(sem, random_sem);
    } catch (const std::invalid_argument&) {
      // degenerate differences; leave the p-value unset
    }
  }
}

enum class FoldMode { cv, ablation, out_of_domain };

FoldResult run_fold(const Prepared& prep, const ExperimentPlan& plan, std::size_t fold,
                    FoldMode mode) {
  FoldResult result;
  result.fold = fold;
  result.story_id = prep.stories[fold].story_id;

  // Held-out block: the fold story's final sentences (cv/ablation) or the
  // whole story (out-of-domain).
  std::vector<std::vector<std::size_t>> test_by_story(prep.stories.size());
  {
    const std::size_t n = prep.stories[fold].segments.size();
    const std::size_t k =
        (mode == FoldMode::out_of_domain) ? n : test_block_size(plan, n);
    for (std::size_t i = n - k; i < n; ++i) test_by_story[fold].push_back(i);
  }

  std::vector<SentenceSegment> train_segments, test_segments;
  std::vector<Embedding> train_targets;
  std::vector<std::string> train_texts, test_texts;
  for (std::size_t s = 0; s < prep.stories.size(); ++s) {
    const PreparedStory& story = prep.stories[s];
    for (std::size_t i = 0; i < story.segments.size(); ++i) {
      const bool is_test = std::find(test_by_story[s].begin(), test_by_story[s].end(), i) !=
                           test_by_story[s].end();
      if (is_test) {
        test_segments.push_back(story.segments[i]);
        test_texts.push_back(story.segments[i].text);
        result.test_sentence_keys.push_back(key_of(prep, SentenceRef{s, i}));
      } else {
        train_segments.push_back(story.segments[i]);
        train_targets.push_back(story.targets[i]);
        train_texts.push_back(story.segments[i].text);
      }
    }
  }

  const std::uint64_t fold_seed = derive_seed(plan.seed, kFoldStream + fold);

  const Pipeline full =
      build_pipeline(train_segments, train_targets, plan, fold_seed, true, true);
  {
    // log the sentences that reached a training batch
    std::vector<std::string> train_keys;
    for (std::size_t s = 0; s < prep.stories.size(); ++s)
      for (std::size_t i = 0; i < prep.stories[s].segments.size(); ++i) {
        const bool is_test = std::find(test_by_story[s].begin(), test_by_story[s].end(), i) !=
                             test_by_story[s].end();
        if (!is_test) train_keys.push_back(key_of(prep, SentenceRef{s, i}));
      }
    std::set<std::string> seen;
    for (const auto& batch : full.batches)
      for (std::size_t idx : batch) seen.insert(train_keys[idx]);
    result.train_sentence_keys.assign(seen.begin(), seen.end());
  }

  auto add_variant = [&](const std::string& name, std::vector<DecodedSentence> rows) {
    result.reports[name] = report_of(rows);
    result.rows.insert(result.rows.end(), std::make_move_iterator(rows.begin()),
                       std::make_move_iterator(rows.end()));
  };

  add_variant("full", decode_with_pipeline("full", full, test_segments, prep, plan, fold));

  if (mode == FoldMode::ablation) {
    Pipeline adapter_only;
    adapter_only.adapter = full.adapter;
    adapter_only.map = identity_calibration(plan.synth.embedder.dim);
    add_variant("adapter_only",
                decode_with_pipeline("adapter_only", adapter_only, test_segments, prep, plan, fold));

    const Pipeline corrector_only =
        build_pipeline(train_segments, train_targets, plan, fold_seed, false, true);
    add_variant("corrector_only", decode_with_pipeline("corrector_only", corrector_only,
                                                       test_segments, prep, plan, fold));
  } else {
    add_variant("baseline", decode_baseline(prep, plan, test_by_story, train_texts, fold));
  }

  result.reports["random"] = random_control(test_texts, prep.all_texts,
                                            derive_seed(plan.seed, kControlStream + fold),
                                            plan.synth.embedder);
  attach_p_values(result);
  return result;
}

void run_parallel(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

ExperimentResult run_folds(const ExperimentPlan& plan, FoldMode mode, const std::string& label) {
  const auto started = std::chrono::steady_clock::now();
  if (plan.synth.num_stories < 2)
    throw std::invalid_argument(label + ": need at least 2 stories");

  const Prepared prep = prepare(plan);
  ExperimentResult result;
  result.mode = label;
  result.seed = plan.seed;
  result.folds.resize(prep.stories.size());

  run_parallel(prep.stories.size(), plan.threads,
               [&](std::size_t fold) { result.folds[fold] = run_fold(prep, plan, fold, mode); });

  // pooled per-variant reports, fold-ordered
  std::map<std::string, std::vector<SentenceScore>> pooled_scores;
  for (const FoldResult& fold : result.folds)
    for (const auto& [variant, report] : fold.reports)
      for (const SentenceScore& s : report.sentences) pooled_scores[variant].push_back(s);
  for (auto& [variant, scores] : pooled_scores) result.pooled[variant] = make_report(scores);

  const auto random_it = result.pooled.find("random");
  if (random_it != result.pooled.end()) {
    const std::vector<double> random_sem = random_it->second.semantic_values();
    for (auto& [variant, report] : result.pooled) {
      if (variant == "random" || report.sentences.size() != random_sem.size()) continue;
      try {
        const double p = paired_t_test(report.semantic_values(), random_sem);
        report.p_vs_other = p;
        result.p_vs_random[variant] = p;
      } catch (const std::invalid_argument&) {
      }
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace

ExperimentResult run_cv(const ExperimentPlan& plan) { return run_folds(plan, FoldMode::cv, "cv"); }

ExperimentResult run_ablation(const ExperimentPlan& plan) {
  return run_folds(plan, FoldMode::ablation, "ablation");
}

ExperimentResult run_out_of_domain(const ExperimentPlan& plan) {
  return run_folds(plan, FoldMode::out_of_domain, "out_of_domain");
}

ExperimentResult run_scaling(const ExperimentPlan& plan, ScalingAxis axis) {
  const auto started = std::chrono::steady_clock::now();
  for (double f : plan.fractions)
    if (!(f > 0.0) || f > 1.0)
      throw std::invalid_argument("run_scaling: fractions must lie in (0, 1]");
  if (plan.repeats < 1) throw std::invalid_argument("run_scaling: repeats must be >= 1");

  const Prepared prep = prepare(plan);
  const std::string axis_name = (axis == ScalingAxis::data) ? "data" : "electrodes";
  const std::size_t channels = prep.stories[0].features.num_channels();

  // fixed test split: the final block of every story
  std::vector<SentenceSegment> train_segments, test_segments;
  std::vector<Embedding> train_targets, test_targets;
  for (const PreparedStory& story : prep.stories) {
    const std::size_t n = story.segments.size();
    const std::size_t k = test_block_size(plan, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= n - k) {
        test_segments.push_back(story.segments[i]);
        test_targets.push_back(story.targets[i]);
      } else {
        train_segments.push_back(story.segments[i]);
        train_targets.push_back(story.targets[i]);
      }
    }
  }

  ExperimentResult result;
  result.mode = "scaling_" + axis_name;
  result.seed = plan.seed;

  struct Job {
    std::size_t fraction_index = 0;
    std::size_t repeat = 0;
  };
  std::vector<Job> jobs;
  for (std::size_t fi = 0; fi < plan.fractions.size(); ++fi)
    for (std::size_t r = 0; r < plan.repeats; ++r) jobs.push_back(Job{fi, r});
  result.scaling.resize(jobs.size());

  const std::uint64_t axis_salt = (axis == ScalingAxis::data) ? 1000 : 2000;
  const std::uint64_t train_seed = derive_seed(plan.seed, kTrainStream);

  run_parallel(jobs.size(), plan.threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const double fraction = plan.fractions[job.fraction_index];
    Rng subset_rng(derive_seed(plan.seed,
                               kScalingStream + axis_salt + 100 * job.fraction_index + job.repeat));

    std::vector<SentenceSegment> sub_train = train_segments;
    std::vector<Embedding> sub_targets = train_targets;
    std::vector<SentenceSegment> sub_test = test_segments;

    if (axis == ScalingAxis::data) {
      const std::size_t k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(fraction * train_segments.size() + 1e-9)));
      std::vector<std::size_t> order(train_segments.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      subset_rng.shuffle(order);
      order.resize(k);
      std::sort(order.begin(), order.end());
      sub_train.clear();
      sub_targets.clear();
      for (std::size_t idx : order) {
        sub_train.push_back(train_segments[idx]);
        sub_targets.push_back(train_targets[idx]);
      }
    } else {
      const std::size_t k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(fraction * channels + 1e-9)));
      std::vector<std::size_t> order(channels);
      std::iota(order.begin(), order.end(), std::size_t{0});
      subset_rng.shuffle(order);
      order.resize(k);
      std::sort(order.begin(), order.end());
      for (SentenceSegment& seg : sub_train) seg.features = slice_columns(seg.features, order);
      for (SentenceSegment& seg : sub_test) seg.features = slice_columns(seg.features, order);
    }

    const Pipeline pipe = build_pipeline(sub_train, sub_targets, plan, train_seed, true, true);

    ScalingPoint point;
    point.axis = axis_name;
    point.fraction = fraction;
    point.repeat = job.repeat;
    point.rows = decode_with_pipeline("full", pipe, sub_test, prep, plan, job.fraction_index);
    for (DecodedSentence& row : point.rows) {
      row.fraction = fraction;
      row.repeat = job.repeat;
    }
    point.report = report_of(point.rows);
    result.scaling[j] = std::move(point);
  });

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_rows(std::ofstream& out, const std::string& mode,
                    std::span<const DecodedSentence> rows) {
  for (const DecodedSentence& r : rows) {
    out << mode << ',' << r.fold << ',' << r.variant << ',' << csv_escape(r.story_id) << ','
        << r.index << ',' << format_double(r.fraction) << ',' << r.repeat << ','
        << csv_escape(r.reference) << ',' << csv_escape(r.decoded) << ','
        << format_double(r.bleu) << ',' << format_double(r.semantic) << '\n';
  }
}

json report_json(const ScoreReport& report) {
  json j = {
      {"n", report.sentences.size()},   {"bleu_mean", report.bleu_mean},
      {"bleu_sd", report.bleu_sd},      {"semantic_mean", report.semantic_mean},
      {"semantic_sd", report.semantic_sd},
  };
  if (report.p_vs_other) j["p_vs_random"] = *report.p_vs_other;
  return j;
}

// Minimal hand-written SVG helpers; tags are emitted balanced so the files
// parse as XML.
std::string svg_header(double width, double height, const std::string& title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
       "\" height=\"" + format_double(height) + "\" viewBox=\"0 0 " + format_double(width) + " " +
       format_double(height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + format_double(width) + "\" height=\"" +
       format_double(height) + "\" fill=\"white\"/>\n";
  s += "<text x=\"20\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" + title +
       "</text>\n";
  return s;
}

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     std::span<const double> xs, std::span<const double> means,
                     std::span<const double> sds) {
  const double w = 520, h = 360, left = 70, right = 30, top = 50, bottom = 50;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < means.size(); ++i) {
    lo = std::min(lo, means[i] - sds[i]);
    hi = std::max(hi, means[i] + sds[i]);
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double x0 = xs.front(), x1 = xs.back();
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0 + 1e-300) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - lo) / (hi - lo) * (h - top - bottom); };

  std::string s = svg_header(w, h, title);
  s += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(h - bottom) + "\" x2=\"" +
       format_double(w - right) + "\" y2=\"" + format_double(h - bottom) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top) + "\" x2=\"" +
       format_double(left) + "\" y2=\"" + format_double(h - bottom) + "\" stroke=\"black\"/>\n";

  std::string poly = "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    poly += format_double(px(xs[i])) + "," + format_double(py(means[i])) + " ";
    s += "<line x1=\"" + format_double(px(xs[i])) + "\" y1=\"" + format_double(py(means[i] - sds[i])) +
         "\" x2=\"" + format_double(px(xs[i])) + "\" y2=\"" + format_double(py(means[i] + sds[i])) +
         "\" stroke=\"steelblue\"/>\n";
    s += "<circle cx=\"" + format_double(px(xs[i])) + "\" cy=\"" + format_double(py(means[i])) +
         "\" r=\"3\" fill=\"steelblue\"/>\n";
    s += "<text x=\"" + format_double(px(xs[i]) - 10) + "\" y=\"" + format_double(h - bottom + 20) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + format_double(xs[i]) + "</text>\n";
  }
  poly += "\"/>\n";
  s += poly;
  s += "<text x=\"" + format_double(left - 50) + "\" y=\"" + format_double(py(hi)) +
       "\" font-family=\"sans-serif\" font-size=\"12\">" + format_double(hi) + "</text>\n";
  s += "<text x=\"" + format_double(left - 50) + "\" y=\"" + format_double(py(lo)) +
       "\" font-family=\"sans-serif\" font-size=\"12\">" + format_double(lo) + "</text>\n";
  s += "</svg>\n";
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << s;
}

void write_bar_plot(const std::filesystem::path& path, const std::string& title,
                    std::span<const std::string> labels, std::span<const double> means,
                    std::span<const double> sds) {
  const double w = 520, h = 360, left = 70, right = 30, top = 50, bottom = 70;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    lo = std::min(lo, means[i] - sds[i]);
    hi = std::max(hi, means[i] + sds[i]);
  }
  if (lo == hi) hi = lo + 1.0;
  auto py = [&](double y) { return h - bottom - (y - lo) / (hi - lo) * (h - top - bottom); };
  const double slot = (w - left - right) / static_cast<double>(means.size());

  std::string s = svg_header(w, h, title);
  s += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(py(0.0)) + "\" x2=\"" +
       format_double(w - right) + "\" y2=\"" + format_double(py(0.0)) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < means.size(); ++i) {
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    const double y = py(std::max(means[i], 0.0));
    const double base = py(std::min(means[i], 0.0));
    s += "<rect x=\"" + format_double(cx - slot * 0.3) + "\" y=\"" + format_double(y) +
         "\" width=\"" + format_double(slot * 0.6) + "\" height=\"" +
         format_double(std::max(base - y, 0.5)) + "\" fill=\"steelblue\"/>\n";
    s += "<line x1=\"" + format_double(cx) + "\" y1=\"" + format_double(py(means[i] - sds[i])) +
         "\" x2=\"" + format_double(cx) + "\" y2=\"" + format_double(py(means[i] + sds[i])) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + format_double(cx - slot * 0.3) + "\" y=\"" + format_double(h - bottom + 20) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + labels[i] + "</text>\n";
  }
  s += "</svg>\n";
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << s;
}

}  // namespace

void write_scores_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "mode,fold,variant,story_id,sentence_index,fraction,repeat,reference,decoded,bleu,semantic\n";
  for (const FoldResult& fold : result.folds) write_csv_rows(out, result.mode, fold.rows);
  for (const ScalingPoint& point : result.scaling) write_csv_rows(out, result.mode, point.rows);
  if (!out) throw io_error("short write to " + path.string());
}

void emit_report(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_scores_csv(result, out_dir / "scores.csv");

  json summary = {
      {"mode", result.mode},
      {"seed", result.seed},
      {"wall_seconds", result.wall_seconds},
  };
  json variants = json::object();
  for (const auto& [name, report] : result.pooled) variants[name] = report_json(report);
  summary["variants"] = variants;

  json folds = json::array();
  for (const FoldResult& fold : result.folds) {
    json jf = {{"fold", fold.fold}, {"story_id", fold.story_id}};
    json reports = json::object();
    for (const auto& [name, report] : fold.reports) reports[name] = report_json(report);
    jf["variants"] = reports;
    jf["train_sentences"] = fold.train_sentence_keys;
    jf["test_sentences"] = fold.test_sentence_keys;
    folds.push_back(std::move(jf));
  }
  summary["folds"] = folds;

  if (!result.scaling.empty()) {
    json points = json::array();
    std::map<double, std::vector<double>> by_fraction;
    for (const ScalingPoint& point : result.scaling) {
      points.push_back({{"axis", point.axis},
                        {"fraction", point.fraction},
                        {"repeat", point.repeat},
                        {"report", report_json(point.report)}});
      by_fraction[point.fraction].push_back(point.report.semantic_mean);
    }
    json per_fraction = json::array();
    std::vector<double> xs, ms, sds;
    for (const auto& [fraction, values] : by_fraction) {
      const double m = mean(values);
      const double sd = sample_sd(values);
      per_fraction.push_back({{"fraction", fraction}, {"semantic_mean", m}, {"semantic_sd", sd}});
      xs.push_back(fraction);
      ms.push_back(m);
      sds.push_back(sd);
    }
    summary["scaling"] = {{"axis", result.scaling.front().axis},
                          {"points", points},
                          {"per_fraction", per_fraction}};
    write_line_plot(out_dir / ("scaling_" + result.scaling.front().axis + ".svg"),
                    "semantic score vs " + result.scaling.front().axis + " fraction", xs, ms, sds);
  }

  if (!result.pooled.empty()) {
    std::vector<std::string> labels;
    std::vector<double> means, sds;
    for (const auto& [name, report] : result.pooled) {
      labels.push_back(name);
      means.push_back(report.semantic_mean);
      sds.push_back(report.semantic_sd);
    }
    write_bar_plot(out_dir / "comparison.svg", "semantic score by variant", labels, means, sds);
  }

  {
    std::ofstream out(out_dir / "summary.json");
    if (!out) throw io_error("cannot write summary.json");
    out << summary.dump(2) << "\n";
  }

  {
    std::ofstream out(out_dir / "transcripts.txt");
    if (!out) throw io_error("cannot write transcripts.txt");
    auto dump_rows = [&](std::span<const DecodedSentence> rows) {
      for (const DecodedSentence& r : rows) {
        out << r.story_id << ":" << r.index << " [" << r.variant << "]\n";
        out << "  reference: " << r.reference << "\n";
        out << "  decoded:   " << r.decoded << "\n";
      }
    };
    for (const FoldResult& fold : result.folds) dump_rows(fold.rows);
    for (const ScalingPoint& point : result.scaling) dump_rows(point.rows);
  }
}

}  // namespace neurotext
