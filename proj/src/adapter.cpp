#include "neurotext/adapter.hpp"

#include "neurotext/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace neurotext {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Post-activation gate values and states for one segment, kept for BPTT.
struct ForwardCache {
  Matrix gates;    // T x 4H: i, f, g, o
  Matrix cells;    // T x H
  Matrix hiddens;  // T x H
  std::vector<double> y;  // D, pre-normalization
  double y_norm = 0.0;
  std::vector<double> out;  // D, normalized
};

ForwardCache forward_cached(const AdapterParams& p, const Matrix& x) {
  if (x.cols != p.channels)
    throw std::invalid_argument("adapter_forward: segment has " + std::to_string(x.cols) +
                                " channels, adapter expects " + std::to_string(p.channels));
  if (x.rows == 0) throw std::invalid_argument("adapter_forward: empty segment");

  const std::size_t T = x.rows, H = p.hidden, C = p.channels, D = p.dim;
  ForwardCache cache;
  cache.gates = Matrix(T, 4 * H);
  cache.cells = Matrix(T, H);
  cache.hiddens = Matrix(T, H);

  std::vector<double> z(4 * H);
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double* xt = x.row(t);
    for (std::size_t k = 0; k < 4 * H; ++k)
      z[k] = p.bias[k] + dot(p.w_input.row(k), xt, C) + dot(p.w_recur.row(k), h.data(), H);
    double* g = cache.gates.row(t);
    for (std::size_t j = 0; j < H; ++j) {
      const double gi = sigmoid(z[j]);
      const double gf = sigmoid(z[H + j]);
      const double gg = std::tanh(z[2 * H + j]);
      const double go = sigmoid(z[3 * H + j]);
      g[j] = gi;
      g[H + j] = gf;
      g[2 * H + j] = gg;
      g[3 * H + j] = go;
      c[j] = gf * c[j] + gi * gg;
      h[j] = go * std::tanh(c[j]);
    }
    std::copy(c.begin(), c.end(), cache.cells.row(t));
    std::copy(h.begin(), h.end(), cache.hiddens.row(t));
  }

  cache.y.resize(D);
  for (std::size_t d = 0; d < D; ++d) cache.y[d] = p.b_proj[d] + dot(p.w_proj.row(d), h.data(), H);
  cache.y_norm = norm2(cache.y.data(), D);
  if (cache.y_norm == 0.0)
    throw std::runtime_error("adapter_forward: projection output is the zero vector");
  cache.out.resize(D);
  for (std::size_t d = 0; d < D; ++d) cache.out[d] = cache.y[d] / cache.y_norm;
  return cache;
}

struct AdapterGrads {
  Matrix w_input, w_recur, w_proj;
  std::vector<double> bias, b_proj;

  explicit AdapterGrads(const AdapterParams& p)
      : w_input(4 * p.hidden, p.channels),
        w_recur(4 * p.hidden, p.hidden),
        w_proj(p.dim, p.hidden),
        bias(4 * p.hidden, 0.0),
        b_proj(p.dim, 0.0) {}
};

// Backpropagates d(loss)/d(normalized output) through the projection and the
// LSTM recurrence, accumulating into grads.
void backward_cached(const AdapterParams& p, const Matrix& x, const ForwardCache& cache,
                     const double* grad_out, AdapterGrads& grads) {
  const std::size_t T = x.rows, H = p.hidden, C = p.channels, D = p.dim;

  // Through the L2 normalization: dy = (g - (g.e) e) / |y|
  std::vector<double> dy(D);
  const double ge = dot(grad_out, cache.out.data(), D);
  for (std::size_t d = 0; d < D; ++d)
    dy[d] = (grad_out[d] - ge * cache.out[d]) / cache.y_norm;

  const double* h_last = cache.hiddens.row(T - 1);
  std::vector<double> dh(H, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    const double g = dy[d];
    grads.b_proj[d] += g;
    double* wrow = grads.w_proj.row(d);
    const double* prow = p.w_proj.row(d);
    for (std::size_t j = 0; j < H; ++j) {
      wrow[j] += g * h_last[j];
      dh[j] += prow[j] * g;
    }
  }

  std::vector<double> dc(H, 0.0), dz(4 * H);
  for (std::size_t t = T; t-- > 0;) {
    const double* g = cache.gates.row(t);
    const double* cell = cache.cells.row(t);
    const double* c_prev = (t == 0) ? nullptr : cache.cells.row(t - 1);
    const double* h_prev = (t == 0) ? nullptr : cache.hiddens.row(t - 1);

    for (std::size_t j = 0; j < H; ++j) {
      const double gi = g[j], gf = g[H + j], gg = g[2 * H + j], go = g[3 * H + j];
      const double tc = std::tanh(cell[j]);
      const double dout = dh[j] * tc;
      const double dcell = dc[j] + dh[j] * go * (1.0 - tc * tc);
      const double cp = c_prev ? c_prev[j] : 0.0;
      dz[j] = dcell * gg * gi * (1.0 - gi);
      dz[H + j] = dcell * cp * gf * (1.0 - gf);
      dz[2 * H + j] = dcell * gi * (1.0 - gg * gg);
      dz[3 * H + j] = dout * go * (1.0 - go);
      dc[j] = dcell * gf;
    }

    const double* xt = x.row(t);
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t k = 0; k < 4 * H; ++k) {
      const double d = dz[k];
      grads.bias[k] += d;
      if (d != 0.0) {
        double* wi = grads.w_input.row(k);
        for (std::size_t i = 0; i < C; ++i) wi[i] += d * xt[i];
        if (h_prev) {
          double* wr = grads.w_recur.row(k);
          const double* pr = p.w_recur.row(k);
          for (std::size_t j = 0; j < H; ++j) {
            wr[j] += d * h_prev[j];
            dh[j] += pr[j] * d;
          }
        }
      }
    }
  }
}

Matrix stack_outputs(const std::vector<ForwardCache>& caches, std::size_t dim) {
  Matrix out(caches.size(), dim);
  for (std::size_t b = 0; b < caches.size(); ++b)
    std::copy(caches[b].out.begin(), caches[b].out.end(), out.row(b));
  return out;
}

Matrix stack_targets(std::span<const Embedding> targets, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), targets[idx[0]].dim());
  for (std::size_t b = 0; b < idx.size(); ++b)
    std::copy(targets[idx[b]].values.begin(), targets[idx[b]].values.end(), out.row(b));
  return out;
}

struct AdamState {
  AdapterGrads m, v;
  std::size_t step = 0;
  explicit AdamState(const AdapterParams& p) : m(p), v(p) {}
};

void adam_update_block(std::vector<double>& param, const std::vector<double>& grad,
                       std::vector<double>& m, std::vector<double>& v, double lr, double b1,
                       double b2, double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    param[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

void adam_step(AdapterParams& p, const AdapterGrads& g, AdamState& st,
               const TrainingConfig& cfg) {
  ++st.step;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(st.step));
  adam_update_block(p.w_input.v, g.w_input.v, st.m.w_input.v, st.v.w_input.v, cfg.learning_rate,
                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  adam_update_block(p.w_recur.v, g.w_recur.v, st.m.w_recur.v, st.v.w_recur.v, cfg.learning_rate,
                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  adam_update_block(p.bias, g.bias, st.m.bias, st.v.bias, cfg.learning_rate, cfg.adam_beta1,
                    cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  adam_update_block(p.w_proj.v, g.w_proj.v, st.m.w_proj.v, st.v.w_proj.v, cfg.learning_rate,
                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  adam_update_block(p.b_proj, g.b_proj, st.m.b_proj, st.v.b_proj, cfg.learning_rate,
                    cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
}

}  // namespace

AdapterParams init_adapter(std::size_t channels, std::size_t hidden, std::size_t dim,
                           std::uint64_t seed) {
  if (channels == 0 || hidden == 0 || dim == 0)
    throw std::invalid_argument("init_adapter: dimensions must be positive");
  AdapterParams p;
  p.channels = channels;
  p.hidden = hidden;
  p.dim = dim;
  p.w_input = Matrix(4 * hidden, channels);
  p.w_recur = Matrix(4 * hidden, hidden);
  p.bias.assign(4 * hidden, 0.0);
  p.w_proj = Matrix(dim, hidden);
  p.b_proj.assign(dim, 0.0);

  Rng rng(derive_seed(seed, 0xADA9));
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : p.w_input.v) w = rng.uniform(-scale, scale);
  for (double& w : p.w_recur.v) w = rng.uniform(-scale, scale);
  for (double& w : p.w_proj.v) w = rng.uniform(-scale, scale);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) p.bias[j] = 1.0;  // forget gate
  return p;
}

Embedding adapter_forward(const AdapterParams& params, const Matrix& features) {
  ForwardCache cache = forward_cached(params, features);
  Embedding e;
  e.values = std::move(cache.out);
  return e;
}

LossResult clip_loss(const Matrix& neural, const Matrix& text, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("clip_loss: tau must be positive");
  if (!neural.same_shape(text)) throw std::invalid_argument("clip_loss: batch shapes differ");
  const std::size_t B = neural.rows, D = neural.cols;
  if (B < 2) throw std::invalid_argument("clip_loss: batch size must be at least 2");

  Matrix s(B, B);
  for (std::size_t i = 0; i < B; ++i)
    for (std::size_t j = 0; j < B; ++j) s(i, j) = dot(neural.row(i), text.row(j), D) / tau;

  // Row- and column-wise softmax cross-entropy with the diagonal as target.
  Matrix p_row(B, B), p_col(B, B);
  double loss = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < B; ++j) mx = std::max(mx, s(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < B; ++j) z += std::exp(s(i, j) - mx);
    for (std::size_t j = 0; j < B; ++j) p_row(i, j) = std::exp(s(i, j) - mx) / z;
    loss += 0.5 * (-(s(i, i) - mx) + std::log(z)) / static_cast<double>(B);
  }
  for (std::size_t j = 0; j < B; ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < B; ++i) mx = std::max(mx, s(i, j));
    double z = 0.0;
    for (std::size_t i = 0; i < B; ++i) z += std::exp(s(i, j) - mx);
    for (std::size_t i = 0; i < B; ++i) p_col(i, j) = std::exp(s(i, j) - mx) / z;
    loss += 0.5 * (-(s(j, j) - mx) + std::log(z)) / static_cast<double>(B);
  }

  LossResult res;
  res.loss = loss;
  res.grad = Matrix(B, D);
  const double inv_b = 1.0 / static_cast<double>(B);
  for (std::size_t i = 0; i < B; ++i) {
    double* grow = res.grad.row(i);
    for (std::size_t j = 0; j < B; ++j) {
      const double delta = (i == j) ? 1.0 : 0.0;
      const double ds = 0.5 * inv_b * ((p_row(i, j) - delta) + (p_col(i, j) - delta));
      const double w = ds / tau;
      const double* trow = text.row(j);
      for (std::size_t d = 0; d < D; ++d) grow[d] += w * trow[d];
    }
  }
  return res;
}

LossResult triplet_loss(const Matrix& neural, const Matrix& text, double margin) {
  if (margin < 0.0) throw std::invalid_argument("triplet_loss: margin must be non-negative");
  if (!neural.same_shape(text)) throw std::invalid_argument("triplet_loss: batch shapes differ");
  const std::size_t B = neural.rows, D = neural.cols;
  if (B < 2) throw std::invalid_argument("triplet_loss: batch size must be at least 2 (no negative available)");

  LossResult res;
  res.grad = Matrix(B, D);
  const double inv_b = 1.0 / static_cast<double>(B);
  std::vector<double> diff(D);
  for (std::size_t i = 0; i < B; ++i) {
    const double* a = neural.row(i);
    double d_ap = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      const double x = a[d] - text(i, d);
      d_ap += x * x;
    }
    d_ap = std::sqrt(d_ap);

    // hardest in-batch negative: the closest non-matching text embedding
    std::size_t neg = B;
    double d_an = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < B; ++j) {
      if (j == i) continue;
      double dj = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        const double x = a[d] - text(j, d);
        dj += x * x;
      }
      dj = std::sqrt(dj);
      if (dj < d_an) {
        d_an = dj;
        neg = j;
      }
    }

    const double hinge = d_ap - d_an + margin;
    if (hinge > 0.0) {
      res.loss += hinge * inv_b;
      double* grow = res.grad.row(i);
      if (d_ap > 1e-12) {
        const double w = inv_b / d_ap;
        for (std::size_t d = 0; d < D; ++d) grow[d] += w * (a[d] - text(i, d));
      }
      if (d_an > 1e-12) {
        const double w = inv_b / d_an;
        for (std::size_t d = 0; d < D; ++d) grow[d] -= w * (a[d] - text(neg, d));
      }
    }
  }
  return res;
}

LossResult alignment_loss(const Matrix& neural, const Matrix& text, const TrainingConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw std::invalid_argument("alignment_loss: alpha must lie in [0, 1]");
  if (cfg.alpha == 1.0) return clip_loss(neural, text, cfg.tau);
  if (cfg.alpha == 0.0) return triplet_loss(neural, text, cfg.margin);

  LossResult clip = clip_loss(neural, text, cfg.tau);
  LossResult trip = triplet_loss(neural, text, cfg.margin);
  LossResult res;
  res.loss = cfg.alpha * clip.loss + (1.0 - cfg.alpha) * trip.loss;
  res.grad = Matrix(neural.rows, neural.cols);
  for (std::size_t i = 0; i < res.grad.v.size(); ++i)
    res.grad.v[i] = cfg.alpha * clip.grad.v[i] + (1.0 - cfg.alpha) * trip.grad.v[i];
  return res;
}

TrainResult train_adapter(std::span<const SentenceSegment> segments,
                          std::span<const Embedding> targets, const TrainingConfig& cfg) {
  if (segments.empty()) throw std::invalid_argument("train_adapter: empty dataset");
  const std::size_t dim = targets.empty() ? 0 : targets[0].dim();
  return train_adapter(segments, targets, cfg,
                       init_adapter(segments[0].features.cols, cfg.hidden, dim, cfg.seed));
}

TrainResult train_adapter(std::span<const SentenceSegment> segments,
                          std::span<const Embedding> targets, const TrainingConfig& cfg,
                          AdapterParams initial) {
  const std::size_t n = segments.size();
  if (n < 2) throw std::invalid_argument("train_adapter: need at least 2 training pairs");
  if (targets.size() != n)
    throw std::invalid_argument("train_adapter: segment/target count mismatch");
  if (cfg.batch_size < 2) throw std::invalid_argument("train_adapter: batch size must be >= 2");

  TrainResult result;
  result.params = std::move(initial);
  AdamState adam(result.params);
  Rng shuffle_rng(derive_seed(cfg.seed, 0x5873));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t num_batches = 0;

    for (std::size_t at = 0; at < n; at += cfg.batch_size) {
      const std::size_t bsz = std::min(cfg.batch_size, n - at);
      if (bsz < 2) break;  // a trailing singleton has no in-batch negative
      std::vector<std::size_t> batch(order.begin() + at, order.begin() + at + bsz);

      std::vector<ForwardCache> caches;
      caches.reserve(bsz);
      for (std::size_t idx : batch)
        caches.push_back(forward_cached(result.params, segments[idx].features));

      const Matrix neural = stack_outputs(caches, result.params.dim);
      const Matrix text = stack_targets(targets, batch);
      const LossResult loss = alignment_loss(neural, text, cfg);
      if (!std::isfinite(loss.loss))
        throw diverged_error("train_adapter: non-finite loss at epoch " + std::to_string(epoch));

      AdapterGrads grads(result.params);
      for (std::size_t b = 0; b < bsz; ++b)
        backward_cached(result.params, segments[batch[b]].features, caches[b], loss.grad.row(b),
                        grads);
      adam_step(result.params, grads, adam, cfg);

      epoch_loss += loss.loss;
      ++num_batches;
      result.batches.push_back(std::move(batch));
    }
    if (num_batches == 0)
      throw std::invalid_argument("train_adapter: no trainable batch (dataset too small)");
    result.loss_curve.push_back(epoch_loss / static_cast<double>(num_batches));
  }
  return result;
}

GradCheckReport grad_check(const AdapterParams& params, std::span<const SentenceSegment> segments,
                           std::span<const Embedding> targets, const TrainingConfig& cfg,
                           double h) {
  const std::size_t n = segments.size();
  if (n < 2) throw std::invalid_argument("grad_check: need at least 2 pairs");

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Matrix text = stack_targets(targets, all);

  auto loss_at = [&](const AdapterParams& p) {
    Matrix neural(n, p.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const ForwardCache cache = forward_cached(p, segments[i].features);
      std::copy(cache.out.begin(), cache.out.end(), neural.row(i));
    }
    return alignment_loss(neural, text, cfg).loss;
  };

  // Analytic gradients through the full pipeline.
  AdapterGrads grads(params);
  {
    std::vector<ForwardCache> caches;
    caches.reserve(n);
    Matrix neural(n, params.dim);
    for (std::size_t i = 0; i < n; ++i) {
      caches.push_back(forward_cached(params, segments[i].features));
      std::copy(caches[i].out.begin(), caches[i].out.end(), neural.row(i));
    }
    const LossResult loss = alignment_loss(neural, text, cfg);
    for (std::size_t i = 0; i < n; ++i)
      backward_cached(params, segments[i].features, caches[i], loss.grad.row(i), grads);
  }

  AdapterParams probe = params;
  auto check_block = [&](const std::string& name, std::vector<double>& block,
                         const std::vector<double>& analytic) {
    double worst = 0.0;
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double saved = block[i];
      block[i] = saved + h;
      const double lp = loss_at(probe);
      block[i] = saved - h;
      const double lm = loss_at(probe);
      block[i] = saved;
      const double fd = (lp - lm) / (2.0 * h);
      // components smaller than the FD noise floor are compared absolutely
      const double scale = std::max(std::abs(analytic[i]) + std::abs(fd), 1e-4);
      worst = std::max(worst, std::abs(analytic[i] - fd) / scale);
    }
    return GradCheckReport::Block{name, worst};
  };

  GradCheckReport report;
  report.blocks.push_back(check_block("w_input", probe.w_input.v, grads.w_input.v));
  report.blocks.push_back(check_block("w_recur", probe.w_recur.v, grads.w_recur.v));
  report.blocks.push_back(check_block("bias", probe.bias, grads.bias));
  report.blocks.push_back(check_block("w_proj", probe.w_proj.v, grads.w_proj.v));
  report.blocks.push_back(check_block("b_proj", probe.b_proj, grads.b_proj));
  for (const auto& b : report.blocks) report.max_rel_err = std::max(report.max_rel_err, b.max_rel_err);
  return report;
}

}  // namespace neurotext
