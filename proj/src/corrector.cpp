#include "neurotext/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace neurotext {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Beam entry: tokens plus cached score. Embeddings are recomputed only for
// the final result.
struct Entry {
  std::vector<std::string> tokens;
  double score = -2.0;
};

// Scores are compared at 1e-12 granularity (the refinement tolerance), so
// normalization round-off cannot outrank the lexicographic tie-break.
long long quantized(double score) { return std::llround(score * 1e12); }

bool entry_less(const Entry& a, const Entry& b) {
  const long long qa = quantized(a.score), qb = quantized(b.score);
  if (qa != qb) return qa > qb;
  return a.tokens < b.tokens;
}

}  // namespace

CalibrationMap identity_calibration(std::size_t dim) {
  CalibrationMap map;
  map.m = Matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) map.m(i, i) = 1.0;
  map.bias.assign(dim, 0.0);
  map.lambda = 0.0;
  return map;
}

CalibrationMap calibrate(const Matrix& neural, const Matrix& text, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("calibrate: lambda must be positive");
  if (!neural.same_shape(text) || neural.rows == 0)
    throw std::invalid_argument("calibrate: need matched non-empty (neural, text) batches");
  const std::size_t P = neural.rows, D = neural.cols;

  // Augmented design [N 1]; the intercept column is not penalized.
  Matrix x(P, D + 1);
  for (std::size_t i = 0; i < P; ++i) {
    std::copy(neural.row(i), neural.row(i) + D, x.row(i));
    x(i, D) = 1.0;
  }
  Matrix g = gram(x);
  for (std::size_t i = 0; i < D; ++i) g(i, i) += lambda;
  const Matrix theta = cholesky_solve(std::move(g), transpose_matmul(x, text));  // (D+1) x D

  CalibrationMap map;
  map.lambda = lambda;
  map.m = Matrix(D, D);
  map.bias.assign(D, 0.0);
  for (std::size_t out = 0; out < D; ++out) {
    for (std::size_t in = 0; in < D; ++in) map.m(out, in) = theta(in, out);
    map.bias[out] = theta(D, out);
  }
  return map;
}

Embedding apply_calibration(const CalibrationMap& map, const Embedding& e) {
  const std::size_t D = map.bias.size();
  if (e.dim() != D) throw std::invalid_argument("apply_calibration: dimension mismatch");
  Embedding out;
  out.values.resize(D);
  for (std::size_t i = 0; i < D; ++i) out.values[i] = map.bias[i] + dot(map.m.row(i), e.values.data(), D);
  const double n = norm2(out.values.data(), D);
  if (n == 0.0) throw std::runtime_error("apply_calibration: calibrated embedding is zero");
  for (double& v : out.values) v /= n;
  return out;
}

Hypothesis invert(const Embedding& target, const Vocabulary& vocab, const InvertConfig& cfg,
                  const EmbedderConfig& embedder) {
  if (vocab.words.empty()) throw std::invalid_argument("invert: empty vocabulary");
  if (cfg.max_len == 0 || cfg.beam_width == 0)
    throw std::invalid_argument("invert: max_len and beam_width must be positive");

  std::unordered_map<std::string, double> score_cache;
  auto score_of = [&](const std::vector<std::string>& tokens) {
    const std::string key = join_tokens(tokens);
    auto it = score_cache.find(key);
    if (it != score_cache.end()) return it->second;
    const double s = cosine(embed(key, embedder), target);
    score_cache.emplace(key, s);
    return s;
  };

  // x0: best single word, lexicographic tie-break.
  Entry best;
  for (const std::string& w : vocab.words) {
    Entry e{{w}, score_of({w})};
    if (best.tokens.empty() || entry_less(e, best)) best = std::move(e);
  }

  std::vector<Entry> beam{best};
  for (std::size_t step = 0; step < cfg.max_steps; ++step) {
    // Pool = current beam plus every single-token edit of every beam entry.
    std::vector<Entry> pool = beam;
    std::unordered_set<std::string> seen;
    for (const Entry& e : pool) seen.insert(join_tokens(e.tokens));

    auto propose = [&](std::vector<std::string> tokens) {
      const std::string key = join_tokens(tokens);
      if (!seen.insert(key).second) return;
      Entry e{std::move(tokens), 0.0};
      e.score = score_of(e.tokens);
      pool.push_back(std::move(e));
    };

    for (const Entry& e : beam) {
      const std::size_t len = e.tokens.size();
      for (std::size_t pos = 0; pos < len; ++pos) {
        for (const std::string& w : vocab.words) {
          if (w == e.tokens[pos]) continue;
          std::vector<std::string> t = e.tokens;
          t[pos] = w;
          propose(std::move(t));
        }
      }
      if (len < cfg.max_len) {
        for (std::size_t pos = 0; pos <= len; ++pos) {
          for (const std::string& w : vocab.words) {
            std::vector<std::string> t = e.tokens;
            t.insert(t.begin() + static_cast<std::ptrdiff_t>(pos), w);
            propose(std::move(t));
          }
        }
      }
      if (len > 1) {
        for (std::size_t pos = 0; pos < len; ++pos) {
          std::vector<std::string> t = e.tokens;
          t.erase(t.begin() + static_cast<std::ptrdiff_t>(pos));
          propose(std::move(t));
        }
      }
    }

    std::sort(pool.begin(), pool.end(), entry_less);
    if (pool.size() > cfg.beam_width) pool.resize(cfg.beam_width);

    if (entry_less(pool.front(), best)) best = pool.front();

    // Fixed point: an unchanged beam reproduces itself forever.
    const bool converged =
        pool.size() == beam.size() &&
        std::equal(pool.begin(), pool.end(), beam.begin(),
                   [](const Entry& a, const Entry& b) { return a.tokens == b.tokens; });
    beam = std::move(pool);
    if (converged) break;
  }

  Hypothesis hyp;
  hyp.tokens = best.tokens;
  hyp.embedding = embed(join_tokens(best.tokens), embedder);
  hyp.score = best.score;
  return hyp;
}

DecodeResult decode(const AdapterParams& params, const CalibrationMap& map,
                    const Matrix& segment_features, const Vocabulary& vocab,
                    const InvertConfig& cfg, const EmbedderConfig& embedder) {
  const Embedding neural = adapter_forward(params, segment_features);
  const Embedding corrected = apply_calibration(map, neural);
  const Hypothesis hyp = invert(corrected, vocab, cfg, embedder);
  return DecodeResult{join_tokens(hyp.tokens), hyp.score};
}

}  // namespace neurotext
