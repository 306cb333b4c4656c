#include "neurotext/experiment.hpp"

#include "neurotext/rng.hpp"

#include <json.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace neurotext;

namespace {

ExperimentPlan tiny_plan() {
  ExperimentPlan plan;
  plan.synth.num_stories = 2;
  plan.synth.sentences_per_story = 4;
  plan.synth.channels = 8;
  plan.synth.noiseless = true;
  plan.training.epochs = 6;
  plan.training.hidden = 8;
  plan.training.batch_size = 4;
  plan.invert.beam_width = 4;
  plan.invert.max_steps = 4;
  plan.invert.max_len = 4;
  plan.baseline_search.beam_width = 4;
  plan.baseline_search.max_len = 4;
  plan.fractions = {0.5, 1.0};
  plan.repeats = 2;
  plan.seed = 11;
  plan.threads = 2;
  return plan;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("neurotext_exp_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

// minimal XML well-formedness check: balanced tags, one root
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool seen_root = false;
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    const std::size_t close = text.find('>', i);
    if (close == std::string::npos) return false;
    std::string tag = text.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?') continue;  // declaration
    if (tag[0] == '/') {
      if (stack.empty()) return false;
      const std::string name = tag.substr(1);
      if (stack.back() != name) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    if (self_closing) tag.pop_back();
    std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
    if (name.empty()) return false;
    if (stack.empty() && seen_root && !self_closing) return false;
    if (!self_closing) {
      stack.push_back(name);
      seen_root = true;
    }
  }
  return stack.empty() && seen_root;
}

}  // namespace

TEST_CASE("cross-validation folds keep train and test sentences disjoint") {
  const ExperimentResult result = run_cv(tiny_plan());
  REQUIRE(result.folds.size() == 2);
  for (const FoldResult& fold : result.folds) {
    REQUIRE(!fold.test_sentence_keys.empty());
    const std::set<std::string> train(fold.train_sentence_keys.begin(),
                                      fold.train_sentence_keys.end());
    for (const std::string& key : fold.test_sentence_keys) CHECK(train.count(key) == 0);
    CHECK(fold.reports.count("full") == 1);
    CHECK(fold.reports.count("baseline") == 1);
    CHECK(fold.reports.count("random") == 1);
    // one held-out sentence per story at this size
    CHECK(fold.test_sentence_keys.size() == 1);
  }
  CHECK(result.pooled.count("full") == 1);
}

TEST_CASE("identical seeds reproduce identical experiment results") {
  const ExperimentPlan plan = tiny_plan();
  const ExperimentResult a = run_cv(plan);
  const ExperimentResult b = run_cv(plan);
  REQUIRE(a.folds.size() == b.folds.size());
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    REQUIRE(a.folds[f].rows.size() == b.folds[f].rows.size());
    for (std::size_t r = 0; r < a.folds[f].rows.size(); ++r) {
      CHECK(a.folds[f].rows[r].decoded == b.folds[f].rows[r].decoded);
      CHECK(a.folds[f].rows[r].semantic == b.folds[f].rows[r].semantic);
      CHECK(a.folds[f].rows[r].bleu == b.folds[f].rows[r].bleu);
    }
  }
}

TEST_CASE("fold results do not depend on scheduling") {
  ExperimentPlan serial = tiny_plan();
  serial.threads = 1;
  ExperimentPlan parallel = tiny_plan();
  parallel.threads = 2;
  const ExperimentResult a = run_cv(serial);
  const ExperimentResult b = run_cv(parallel);
  REQUIRE(a.folds.size() == b.folds.size());
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    REQUIRE(a.folds[f].rows.size() == b.folds[f].rows.size());
    for (std::size_t r = 0; r < a.folds[f].rows.size(); ++r) {
      CHECK(a.folds[f].rows[r].decoded == b.folds[f].rows[r].decoded);
      CHECK(a.folds[f].rows[r].semantic == b.folds[f].rows[r].semantic);
    }
  }
}

TEST_CASE("ablation produces the four variants") {
  const ExperimentResult result = run_ablation(tiny_plan());
  for (const FoldResult& fold : result.folds) {
    CHECK(fold.reports.count("full") == 1);
    CHECK(fold.reports.count("adapter_only") == 1);
    CHECK(fold.reports.count("corrector_only") == 1);
    CHECK(fold.reports.count("random") == 1);
    CHECK(fold.reports.count("baseline") == 0);
  }
  // random control is reproducible: rerunning the plan reproduces it exactly
  const ExperimentResult again = run_ablation(tiny_plan());
  for (std::size_t f = 0; f < result.folds.size(); ++f) {
    const auto& r1 = result.folds[f].reports.at("random");
    const auto& r2 = again.folds[f].reports.at("random");
    REQUIRE(r1.sentences.size() == r2.sentences.size());
    for (std::size_t i = 0; i < r1.sentences.size(); ++i)
      CHECK(r1.sentences[i].semantic == r2.sentences[i].semantic);
  }
}

TEST_CASE("out-of-domain folds exclude the held-out story entirely") {
  const ExperimentResult result = run_out_of_domain(tiny_plan());
  REQUIRE(result.folds.size() == 2);
  for (const FoldResult& fold : result.folds) {
    CHECK(fold.test_sentence_keys.size() == 4);  // the whole story
    for (const std::string& key : fold.train_sentence_keys)
      CHECK(key.find(fold.story_id + ":") != 0);
    for (const std::string& key : fold.test_sentence_keys)
      CHECK(key.find(fold.story_id + ":") == 0);
  }
}

TEST_CASE("experiment plan defaults and validation") {
  const ExperimentPlan plan;
  CHECK(plan.fractions == std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0});
  CHECK(plan.repeats == 5);
  CHECK(plan.test_fraction == 0.2);
  CHECK(plan.lags == std::vector<int>{0, 1, 2, 3});

  ExperimentPlan bad = tiny_plan();
  bad.fractions = {0.0, 0.5};
  CHECK_THROWS_AS(run_scaling(bad, ScalingAxis::data), std::invalid_argument);
  bad = tiny_plan();
  bad.repeats = 0;
  CHECK_THROWS_AS(run_scaling(bad, ScalingAxis::data), std::invalid_argument);
  bad = tiny_plan();
  bad.synth.num_stories = 1;
  CHECK_THROWS_AS(run_cv(bad), std::invalid_argument);
}

TEST_CASE("emit_report fails loudly on an unwritable path") {
  TempDir dir;
  {
    std::ofstream file(dir.path / "blocker");
    file << "plain file";
  }
  const ExperimentResult result = run_cv(tiny_plan());
  CHECK_THROWS(emit_report(result, dir.path / "blocker" / "nested"));
}

TEST_CASE("scaling at fraction 1.0 collapses to identical repeats") {
  ExperimentPlan plan = tiny_plan();
  plan.fractions = {1.0};
  plan.repeats = 2;
  const ExperimentResult result = run_scaling(plan, ScalingAxis::data);
  REQUIRE(result.scaling.size() == 2);
  CHECK(result.scaling[0].report.semantic_mean == result.scaling[1].report.semantic_mean);
  CHECK(result.scaling[0].report.bleu_mean == result.scaling[1].report.bleu_mean);

  const ExperimentResult electrode = run_scaling(plan, ScalingAxis::electrodes);
  REQUIRE(electrode.scaling.size() == 2);
  CHECK(electrode.scaling[0].report.semantic_mean == electrode.scaling[1].report.semantic_mean);
}

TEST_CASE("scaling reports per-point rows tagged with fraction and repeat") {
  ExperimentPlan plan = tiny_plan();
  plan.repeats = 1;
  const ExperimentResult result = run_scaling(plan, ScalingAxis::electrodes);
  REQUIRE(result.scaling.size() == plan.fractions.size());
  for (const ScalingPoint& point : result.scaling) {
    CHECK(point.axis == "electrodes");
    REQUIRE(!point.rows.empty());
    for (const DecodedSentence& row : point.rows) {
      CHECK(row.fraction == point.fraction);
      CHECK(row.repeat == point.repeat);
    }
    // aggregate is recomputable from the rows
    std::vector<double> sem;
    for (const DecodedSentence& row : point.rows) sem.push_back(row.semantic);
    CHECK(point.report.semantic_mean == doctest::Approx(mean(sem)).epsilon(1e-15));
    CHECK(point.report.semantic_sd == doctest::Approx(sample_sd(sem)).epsilon(1e-15));
  }
}

TEST_CASE("emit_report writes consistent CSV, JSON and well-formed SVG") {
  TempDir dir;
  const ExperimentResult result = run_cv(tiny_plan());
  emit_report(result, dir.path);

  const std::string csv_text = slurp(dir.path / "scores.csv");
  const auto rows = parse_csv(csv_text);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == std::vector<std::string>{"mode", "fold", "variant", "story_id",
                                            "sentence_index", "fraction", "repeat", "reference",
                                            "decoded", "bleu", "semantic"});
  std::size_t expected_rows = 0;
  for (const FoldResult& fold : result.folds) expected_rows += fold.rows.size();
  CHECK(rows.size() - 1 == expected_rows);

  // JSON aggregates match a recomputation from the CSV
  nlohmann::json summary;
  {
    std::ifstream in(dir.path / "summary.json");
    in >> summary;
  }
  std::map<std::string, std::vector<double>> by_variant;
  for (std::size_t i = 1; i < rows.size(); ++i)
    by_variant[rows[i][2]].push_back(std::stod(rows[i][10]));
  for (const auto& [variant, values] : by_variant) {
    const double reported = summary["variants"][variant]["semantic_mean"].get<double>();
    CHECK(reported == doctest::Approx(mean(values)).epsilon(1e-9));
  }

  CHECK(xml_well_formed(slurp(dir.path / "comparison.svg")));
  CHECK(std::filesystem::exists(dir.path / "transcripts.txt"));

  // per-sentence CSV output is byte-identical across identical runs
  TempDir dir2;
  emit_report(run_cv(tiny_plan()), dir2.path);
  CHECK(slurp(dir2.path / "scores.csv") == csv_text);
}

TEST_CASE("scaling emit_report includes the scaling plot and per-fraction aggregates") {
  TempDir dir;
  ExperimentPlan plan = tiny_plan();
  plan.repeats = 2;
  const ExperimentResult result = run_scaling(plan, ScalingAxis::data);
  emit_report(result, dir.path);
  CHECK(xml_well_formed(slurp(dir.path / "scaling_data.svg")));

  nlohmann::json summary;
  {
    std::ifstream in(dir.path / "summary.json");
    in >> summary;
  }
  REQUIRE(summary.contains("scaling"));
  const auto per_fraction = summary["scaling"]["per_fraction"];
  REQUIRE(per_fraction.size() == plan.fractions.size());
  // sd across repeats recomputed from the points
  for (const auto& entry : per_fraction) {
    const double fraction = entry["fraction"].get<double>();
    std::vector<double> means;
    for (const ScalingPoint& p : result.scaling)
      if (p.fraction == fraction) means.push_back(p.report.semantic_mean);
    CHECK(entry["semantic_sd"].get<double>() == doctest::Approx(sample_sd(means)).epsilon(1e-12));
  }
}
