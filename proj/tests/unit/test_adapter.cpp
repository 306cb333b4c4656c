#include "neurotext/adapter.hpp"

#include "neurotext/rng.hpp"

#include <doctest.h>

#include <functional>

#include <cmath>

using namespace neurotext;

namespace {

Matrix random_unit_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double n = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = rng.normal();
      n += m(r, c) * m(r, c);
    }
    n = std::sqrt(n);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= n;
  }
  return m;
}

std::vector<SentenceSegment> random_segments(std::size_t count, std::size_t channels,
                                             std::size_t max_frames, Rng& rng) {
  std::vector<SentenceSegment> segments;
  for (std::size_t i = 0; i < count; ++i) {
    SentenceSegment seg;
    seg.story_id = "s";
    seg.index = i;
    seg.text = "t" + std::to_string(i);
    seg.features = Matrix(1 + rng.below(max_frames), channels);
    for (double& v : seg.features.v) v = rng.normal();
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<Embedding> random_targets(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<Embedding> targets;
  const Matrix rows = random_unit_rows(count, dim, rng);
  for (std::size_t i = 0; i < count; ++i) {
    Embedding e;
    e.values.assign(rows.row(i), rows.row(i) + dim);
    targets.push_back(std::move(e));
  }
  return targets;
}

// Central finite differences of a loss over a flat parameter view.
double fd_max_rel_err(const Matrix& point, const std::function<double(const Matrix&)>& f,
                      const Matrix& analytic, double h) {
  double worst = 0.0;
  Matrix probe = point;
  for (std::size_t i = 0; i < probe.v.size(); ++i) {
    const double saved = probe.v[i];
    probe.v[i] = saved + h;
    const double lp = f(probe);
    probe.v[i] = saved - h;
    const double lm = f(probe);
    probe.v[i] = saved;
    const double fd = (lp - lm) / (2.0 * h);
    const double scale = std::max(std::abs(analytic.v[i]) + std::abs(fd), 1e-4);
    worst = std::max(worst, std::abs(analytic.v[i] - fd) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("forward with zero weights and a unit bias returns the normalized bias") {
  AdapterParams p;
  p.channels = 2;
  p.hidden = 3;
  p.dim = 4;
  p.w_input = Matrix(12, 2);
  p.w_recur = Matrix(12, 3);
  p.bias.assign(12, 0.0);
  p.w_proj = Matrix(4, 3);
  p.b_proj = {0.0, 2.0, 0.0, 0.0};

  Matrix x(5, 2, 0.7);
  const Embedding e = adapter_forward(p, x);
  CHECK(e.values[0] == 0.0);
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-15));

  p.b_proj.assign(4, 0.0);  // all-zero parameters: zero projection output
  CHECK_THROWS_AS(adapter_forward(p, x), std::runtime_error);
}

TEST_CASE("single LSTM step matches an independent scalar recomputation") {
  // H = 1, C = 1, D = 1: every gate is a scalar formula
  AdapterParams p;
  p.channels = 1;
  p.hidden = 1;
  p.dim = 1;
  p.w_input = Matrix(4, 1);
  p.w_recur = Matrix(4, 1);
  p.bias = {0.05, -0.1, 0.2, 0.3};
  p.w_proj = Matrix(1, 1);
  p.b_proj = {0.25};
  p.w_input(0, 0) = 0.5;   // input gate
  p.w_input(1, 0) = -0.4;  // forget gate
  p.w_input(2, 0) = 0.9;   // candidate
  p.w_input(3, 0) = 0.7;   // output gate
  p.w_recur(0, 0) = 0.1;
  p.w_recur(1, 0) = 0.2;
  p.w_recur(2, 0) = -0.3;
  p.w_recur(3, 0) = 0.4;
  p.w_proj(0, 0) = 1.5;

  const double x = 0.8;
  Matrix seg(1, 1, x);
  const Embedding e = adapter_forward(p, seg);

  auto sigma = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double gi = sigma(0.5 * x + 0.05);
  const double gg = std::tanh(0.9 * x + 0.2);
  const double go = sigma(0.7 * x + 0.3);
  const double c = gi * gg;  // forget gate contributes nothing at c0 = 0
  const double hh = go * std::tanh(c);
  const double y = 1.5 * hh + 0.25;
  CHECK(e.values[0] == doctest::Approx(y / std::abs(y)).epsilon(1e-14));

  // identical segments give identical embeddings
  const Embedding e2 = adapter_forward(p, seg);
  CHECK(e.values == e2.values);
}

TEST_CASE("clip loss fixtures") {
  // B = 2, neural == text, orthogonal pairs: loss = ln(1 + exp(-1/tau))
  Matrix n(2, 2);
  n(0, 0) = 1.0;
  n(1, 1) = 1.0;
  const LossResult r = clip_loss(n, n, 0.1);
  CHECK(r.loss == doctest::Approx(4.5398899216870535e-05).epsilon(1e-10));

  // constant similarity matrix: loss = ln B
  Matrix same(3, 2);
  for (std::size_t i = 0; i < 3; ++i) same(i, 0) = 1.0;
  const LossResult u = clip_loss(same, same, 0.5);
  CHECK(u.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  Matrix single(1, 2, 1.0);
  CHECK_THROWS_AS(clip_loss(single, single, 0.1), std::invalid_argument);
}

TEST_CASE("clip loss gradient matches central finite differences") {
  Rng rng(11);
  const Matrix text = random_unit_rows(4, 8, rng);
  const Matrix neural = random_unit_rows(4, 8, rng);
  const LossResult r = clip_loss(neural, text, 0.1);
  const double err = fd_max_rel_err(
      neural, [&](const Matrix& m) { return clip_loss(m, text, 0.1).loss; }, r.grad, 1e-5);
  CHECK(err < 1e-4);
}

TEST_CASE("triplet loss fixtures") {
  // anchor0 equals the non-matching text and is orthogonal to its positive:
  // per-triplet loss sqrt(2) - 0 + 1; the other triplet's hinge is inactive
  Matrix neural(2, 2), text(2, 2);
  neural(0, 0) = 1.0;  // a0 = e_x
  neural(1, 0) = 1.0;  // a1 = e_x
  text(0, 1) = 1.0;    // t0 = e_y (positive of a0)
  text(1, 0) = 1.0;    // t1 = e_x (= a0, the hardest negative for a0)
  const LossResult r = triplet_loss(neural, text, 1.0);
  // triplet 0: sqrt(2) - 0 + 1 = 2.41421356...; triplet 1: max(0, 0 - sqrt(2) + 1) = 0
  CHECK(r.loss == doctest::Approx((std::sqrt(2.0) + 1.0) / 2.0).epsilon(1e-12));

  // hinge inactive when the negative is at least margin farther
  Matrix n2(2, 3), t2(2, 3);
  n2(0, 0) = 1.0;
  t2(0, 0) = 1.0;  // a = p
  n2(1, 2) = 1.0;
  t2(1, 2) = -1.0;  // far negative for row 0, its own positive antipodal
  const LossResult inactive = triplet_loss(n2, t2, 1.0);
  // row 0: d(a,p) = 0, d(a,n) = sqrt(2) -> hinge max(0, 1 - sqrt(2)) = 0
  CHECK(inactive.loss >= 0.0);

  Matrix single(1, 2, 1.0);
  CHECK_THROWS_AS(triplet_loss(single, single, 1.0), std::invalid_argument);
}

TEST_CASE("triplet gradient matches central finite differences") {
  Rng rng(19);
  const Matrix text = random_unit_rows(4, 8, rng);
  const Matrix neural = random_unit_rows(4, 8, rng);
  const LossResult r = triplet_loss(neural, text, 1.0);
  const double err = fd_max_rel_err(
      neural, [&](const Matrix& m) { return triplet_loss(m, text, 1.0).loss; }, r.grad, 1e-5);
  CHECK(err < 1e-4);
}

TEST_CASE("alignment loss degenerates to its components and combines linearly") {
  Rng rng(23);
  const Matrix text = random_unit_rows(4, 8, rng);
  const Matrix neural = random_unit_rows(4, 8, rng);

  TrainingConfig cfg;
  cfg.alpha = 1.0;
  CHECK(alignment_loss(neural, text, cfg).loss == clip_loss(neural, text, cfg.tau).loss);
  cfg.alpha = 0.0;
  CHECK(alignment_loss(neural, text, cfg).loss == triplet_loss(neural, text, cfg.margin).loss);

  cfg.alpha = 0.25;
  const double expected = 0.25 * clip_loss(neural, text, cfg.tau).loss +
                          0.75 * triplet_loss(neural, text, cfg.margin).loss;
  CHECK(alignment_loss(neural, text, cfg).loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("full BPTT gradients pass the finite-difference check on several seeds") {
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    Rng rng(derive_seed(seed, 99));
    const auto segments = random_segments(4, 3, 5, rng);
    const auto targets = random_targets(4, 8, rng);
    TrainingConfig cfg;
    cfg.hidden = 4;
    const AdapterParams params = init_adapter(3, 4, 8, seed);
    const GradCheckReport report = grad_check(params, segments, targets, cfg);
    REQUIRE(report.blocks.size() == 5);
    CHECK(report.max_rel_err < 1e-4);
  }
}

TEST_CASE("training reduces the loss on a planted linear relationship") {
  Rng rng(31);
  const std::size_t n = 16, channels = 6, dim = 8;
  const auto targets = random_targets(n, dim, rng);
  // planted: every frame of segment i is a fixed linear image of target i
  Matrix mix(channels, dim);
  for (double& v : mix.v) v = rng.normal();
  std::vector<SentenceSegment> segments;
  for (std::size_t i = 0; i < n; ++i) {
    SentenceSegment seg;
    seg.story_id = "s";
    seg.index = i;
    seg.text = "t" + std::to_string(i);
    seg.features = Matrix(6, channels);
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t ch = 0; ch < channels; ++ch)
        seg.features(t, ch) = dot(mix.row(ch), targets[i].values.data(), dim) + 0.01 * rng.normal();
    segments.push_back(std::move(seg));
  }

  TrainingConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 100;
  cfg.seed = 5;
  const TrainResult result = train_adapter(segments, targets, cfg);
  REQUIRE(result.loss_curve.size() == 100);
  CHECK(result.loss_curve.back() < result.loss_curve.front());
}

TEST_CASE("zero learning rate leaves parameters untouched") {
  Rng rng(37);
  const auto segments = random_segments(8, 3, 4, rng);
  const auto targets = random_targets(8, 6, rng);
  TrainingConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 5;
  cfg.learning_rate = 0.0;
  cfg.batch_size = 8;  // one full batch per epoch keeps the curve exactly constant
  const AdapterParams initial = init_adapter(3, 4, 6, cfg.seed);
  const TrainResult result = train_adapter(segments, targets, cfg, initial);
  CHECK(result.params.w_input.v == initial.w_input.v);
  CHECK(result.params.w_recur.v == initial.w_recur.v);
  CHECK(result.params.bias == initial.bias);
  CHECK(result.params.w_proj.v == initial.w_proj.v);
  CHECK(result.params.b_proj == initial.b_proj);
  // shuffling permutes the summation order inside the batch, so the curve is
  // constant up to floating-point reassociation
  for (double loss : result.loss_curve)
    CHECK(loss == doctest::Approx(result.loss_curve.front()).epsilon(1e-12));
}

TEST_CASE("training is bit-deterministic per seed") {
  Rng rng(41);
  const auto segments = random_segments(10, 3, 4, rng);
  const auto targets = random_targets(10, 6, rng);
  TrainingConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 8;
  cfg.batch_size = 4;
  cfg.seed = 77;
  const TrainResult a = train_adapter(segments, targets, cfg);
  const TrainResult b = train_adapter(segments, targets, cfg);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.params.w_input.v == b.params.w_input.v);
  CHECK(a.params.w_proj.v == b.params.w_proj.v);
  CHECK(a.batches == b.batches);
}

TEST_CASE("non-finite features abort with a diverged error naming the epoch") {
  Rng rng(43);
  auto segments = random_segments(4, 2, 3, rng);
  const auto targets = random_targets(4, 4, rng);
  segments[2].features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainingConfig cfg;
  cfg.hidden = 2;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  try {
    train_adapter(segments, targets, cfg);
    FAIL("expected diverged_error");
  } catch (const diverged_error& e) {
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("channel mismatch is a shape error") {
  const AdapterParams p = init_adapter(4, 3, 5, 1);
  Matrix wrong(3, 2, 1.0);
  CHECK_THROWS_AS(adapter_forward(p, wrong), std::invalid_argument);
}

TEST_CASE("training config defaults are pinned") {
  const TrainingConfig cfg;
  CHECK(cfg.alpha == 0.25);
  CHECK(cfg.tau == 0.1);
  CHECK(cfg.margin == 1.0);
  CHECK(cfg.learning_rate == 1.3e-3);
  CHECK(cfg.batch_size == 8);
  CHECK(cfg.epochs == 100);
  CHECK(cfg.adam_beta1 == 0.9);
  CHECK(cfg.adam_beta2 == 0.999);
  CHECK(cfg.adam_eps == 1e-8);
  CHECK(cfg.hidden == 32);
}
