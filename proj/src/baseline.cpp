#include "neurotext/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace neurotext {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace

Matrix build_design(std::span<const StimulusSpan> spans, std::size_t num_frames,
                    std::span<const int> lags, std::size_t dim) {
  if (lags.empty()) throw std::invalid_argument("build_design: need at least one lag");
  for (int lag : lags)
    if (lag < 0) throw std::invalid_argument("build_design: lags must be non-negative");

  Matrix design(num_frames, lags.size() * dim);
  for (const StimulusSpan& span : spans) {
    if (span.embedding.dim() != dim)
      throw std::invalid_argument("build_design: embedding dimension mismatch");
    if (span.end_frame > num_frames || span.start_frame >= span.end_frame)
      throw std::invalid_argument("build_design: span outside the frame range");
    for (std::size_t slot = 0; slot < lags.size(); ++slot) {
      const std::size_t lag = static_cast<std::size_t>(lags[slot]);
      const std::size_t lo = span.start_frame + lag;
      const std::size_t hi = std::min(span.end_frame + lag, num_frames);
      for (std::size_t t = lo; t < hi; ++t) {
        double* row = design.row(t) + slot * dim;
        for (std::size_t d = 0; d < dim; ++d) row[d] += span.embedding.values[d];
      }
    }
  }
  return design;
}

EncodingModel fit_encoding(const Matrix& design, const Matrix& responses, double lambda,
                           std::span<const int> lags, std::size_t dim) {
  if (lambda < 0.0) throw std::invalid_argument("fit_encoding: lambda must be non-negative");
  if (design.rows != responses.rows)
    throw std::invalid_argument("fit_encoding: design/response frame counts differ");
  if (design.cols != lags.size() * dim)
    throw std::invalid_argument("fit_encoding: design width does not match lags * dim");

  Matrix g = gram(design);
  for (std::size_t i = 0; i < g.rows; ++i) g(i, i) += lambda;
  // singular + lambda == 0 surfaces here as a Cholesky failure
  Matrix w = cholesky_solve(std::move(g), transpose_matmul(design, responses));

  EncodingModel model;
  model.lags.assign(lags.begin(), lags.end());
  model.dim = dim;
  model.channels = responses.cols;
  model.lambda = lambda;
  model.weights = std::move(w);
  model.variance.assign(model.channels, 0.0);

  const Matrix predicted = matmul(design, model.weights);
  for (std::size_t t = 0; t < responses.rows; ++t)
    for (std::size_t ch = 0; ch < responses.cols; ++ch) {
      const double r = responses(t, ch) - predicted(t, ch);
      model.variance[ch] += r * r;
    }
  const double inv_n = responses.rows ? 1.0 / static_cast<double>(responses.rows) : 0.0;
  for (double& v : model.variance) v = std::max(v * inv_n, EncodingModel::variance_floor);
  return model;
}

double log_likelihood(const EncodingModel& model, const Matrix& responses,
                      const Embedding& candidate, std::size_t start_frame,
                      std::size_t end_frame) {
  if (end_frame > responses.rows || start_frame >= end_frame)
    throw std::out_of_range("log_likelihood: span outside the response range");
  if (responses.cols != model.channels)
    throw std::invalid_argument("log_likelihood: channel count mismatch");
  if (candidate.dim() != model.dim)
    throw std::invalid_argument("log_likelihood: embedding dimension mismatch");

  // Per-lag prediction of the constant in-span stimulus; row t of the design
  // activates slot l once t - lag_l reaches the span start.
  const std::size_t n_lags = model.lags.size();
  Matrix slot_pred(n_lags, model.channels);
  for (std::size_t slot = 0; slot < n_lags; ++slot)
    for (std::size_t d = 0; d < model.dim; ++d) {
      const double e = candidate.values[d];
      if (e == 0.0) continue;
      const double* wrow = model.weights.row(slot * model.dim + d);
      double* out = slot_pred.row(slot);
      for (std::size_t ch = 0; ch < model.channels; ++ch) out[ch] += e * wrow[ch];
    }

  double ll = 0.0;
  std::vector<double> mu(model.channels, 0.0);
  int active = -1;
  for (std::size_t t = start_frame; t < end_frame; ++t) {
    const std::size_t offset = t - start_frame;
    int now_active = 0;
    for (std::size_t slot = 0; slot < n_lags; ++slot)
      if (static_cast<std::size_t>(model.lags[slot]) <= offset) ++now_active;
    if (now_active != active) {
      std::fill(mu.begin(), mu.end(), 0.0);
      for (std::size_t slot = 0; slot < n_lags; ++slot) {
        if (static_cast<std::size_t>(model.lags[slot]) > offset) continue;
        const double* p = slot_pred.row(slot);
        for (std::size_t ch = 0; ch < model.channels; ++ch) mu[ch] += p[ch];
      }
      active = now_active;
    }
    const double* resp = responses.row(t);
    for (std::size_t ch = 0; ch < model.channels; ++ch) {
      const double var = model.variance[ch];
      const double r = resp[ch] - mu[ch];
      ll += -0.5 * (kLog2Pi + std::log(var)) - r * r / (2.0 * var);
    }
  }
  return ll;
}

double NgramLM::prob(std::size_t context, std::size_t next) const {
  const std::size_t v1 = vocab.size() + 1;
  if (context >= v1 || next >= v1) throw std::invalid_argument("NgramLM::prob: index out of range");
  double row_total = 0.0;
  for (std::size_t j = 0; j < v1; ++j) row_total += counts(context, j);
  return (counts(context, next) + k) / (row_total + k * static_cast<double>(v1));
}

NgramLM fit_bigram_lm(std::span<const std::string> texts, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("fit_bigram_lm: smoothing k must be positive");
  NgramLM lm;
  lm.k = k;
  lm.vocab = Vocabulary::from_corpus(texts);
  const std::size_t v = lm.vocab.size();
  if (v == 0) throw std::invalid_argument("fit_bigram_lm: empty corpus vocabulary");

  // vocab preserves first-occurrence order; linear lookup is fine at this size
  auto find_word = [&](const std::string& w) {
    for (std::size_t i = 0; i < v; ++i)
      if (lm.vocab.words[i] == w) return i;
    return v;  // unreachable for corpus tokens
  };

  lm.counts = Matrix(v + 1, v + 1);
  for (const std::string& text : texts) {
    const std::vector<std::string> tokens = normalize_text(text);
    std::size_t context = lm.start_context();
    for (const std::string& tok : tokens) {
      const std::size_t idx = find_word(tok);
      lm.counts(context, idx) += 1.0;
      context = idx;
    }
    if (!tokens.empty()) lm.counts(context, lm.end_token()) += 1.0;
  }
  return lm;
}

BaselineDecodeResult beam_decode(const EncodingModel& model, const Matrix& responses,
                                 std::size_t start_frame, std::size_t end_frame,
                                 const NgramLM& lm, const BaselineSearchConfig& cfg,
                                 const EmbedderConfig& embedder) {
  if (lm.vocab.words.empty()) throw std::invalid_argument("beam_decode: empty LM vocabulary");
  if (cfg.beam_width == 0 || cfg.proposals == 0 || cfg.max_len == 0)
    throw std::invalid_argument("beam_decode: beam_width, proposals and max_len must be positive");

  const std::size_t v = lm.vocab.size();

  struct Hyp {
    std::vector<std::size_t> tokens;
    bool complete = false;
    double ll = 0.0;
  };
  auto words_of = [&](const Hyp& h) {
    std::vector<std::string> words;
    words.reserve(h.tokens.size());
    for (std::size_t idx : h.tokens) words.push_back(lm.vocab.words[idx]);
    return words;
  };
  auto hyp_less = [&](const Hyp& a, const Hyp& b) {
    if (a.ll != b.ll) return a.ll > b.ll;
    return words_of(a) < words_of(b);
  };

  auto score_tokens = [&](const std::vector<std::size_t>& tokens) {
    const Embedding e = embed(join_tokens([&] {
                                std::vector<std::string> ws;
                                for (std::size_t i : tokens) ws.push_back(lm.vocab.words[i]);
                                return ws;
                              }()),
                              embedder);
    return log_likelihood(model, responses, e, start_frame, end_frame);
  };

  std::vector<Hyp> beam{Hyp{}};
  for (std::size_t round = 0; round < cfg.max_len; ++round) {
    bool any_incomplete = false;
    std::vector<Hyp> pool;
    for (const Hyp& h : beam) {
      if (h.complete) {
        pool.push_back(h);
        continue;
      }
      any_incomplete = true;
      const std::size_t context = h.tokens.empty() ? lm.start_context() : h.tokens.back();

      // top-p continuations by LM probability; ties by vocab order
      std::vector<std::pair<double, std::size_t>> ranked;
      ranked.reserve(v + 1);
      for (std::size_t nxt = 0; nxt <= v; ++nxt) {
        if (nxt == lm.end_token() && h.tokens.empty()) continue;  // no empty sentence
        ranked.emplace_back(lm.prob(context, nxt), nxt);
      }
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      if (ranked.size() > cfg.proposals) ranked.resize(cfg.proposals);

      for (const auto& [prob, nxt] : ranked) {
        if (nxt == lm.end_token()) {
          Hyp done = h;
          done.complete = true;
          pool.push_back(std::move(done));
        } else {
          Hyp ext = h;
          ext.tokens.push_back(nxt);
          ext.ll = score_tokens(ext.tokens);
          if (ext.tokens.size() >= cfg.max_len) ext.complete = true;
          pool.push_back(std::move(ext));
        }
      }
    }
    if (!any_incomplete) break;

    std::sort(pool.begin(), pool.end(), hyp_less);
    if (pool.size() > cfg.beam_width) pool.resize(cfg.beam_width);
    beam = std::move(pool);
  }

  // best complete hypothesis; at this point every beam entry is complete or
  // the round cap force-completed it
  const Hyp* best = nullptr;
  for (const Hyp& h : beam) {
    if (h.tokens.empty()) continue;
    if (!best || hyp_less(h, *best)) best = &h;
  }
  if (!best) throw std::runtime_error("beam_decode: no non-empty hypothesis produced");
  return BaselineDecodeResult{join_tokens(words_of(*best)), best->ll};
}

}  // namespace neurotext
