#include "neurotext/embedder.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace neurotext {

std::vector<std::string> normalize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (alnum) {
      cur.push_back(static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::uint64_t feature_hash(std::string_view feature, std::uint64_t seed) {
  // FNV-1a folded with the seed, splitmix64 finalizer. Exact uint64
  // arithmetic keeps bucket assignments identical on every platform.
  std::uint64_t h = seed ^ 0xCBF29CE484222325ULL;
  for (char ch : feature) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  h ^= h >> 30;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 27;
  h *= 0x94D049BB133111EBULL;
  h ^= h >> 31;
  return h;
}

Embedding embed(std::string_view text, const EmbedderConfig& cfg) {
  const std::vector<std::string> tokens = normalize_text(text);
  if (tokens.empty()) throw std::invalid_argument("embed: text has no tokens");
  if (cfg.dim == 0) throw std::invalid_argument("embed: dimension must be positive");

  Embedding out;
  out.values.assign(cfg.dim, 0.0);
  auto add = [&](const std::string& feature) {
    const std::uint64_t h = feature_hash(feature, cfg.hash_seed);
    const std::size_t bucket = static_cast<std::size_t>((h >> 1) % cfg.dim);
    out.values[bucket] += (h & 1ULL) ? 1.0 : -1.0;
  };

  std::string feat;
  for (const std::string& w : tokens) {
    feat = "u:";
    feat += w;
    add(feat);
    // boundary-marked character trigrams: "#dog#" -> #do, dog, og#
    const std::string marked = "#" + w + "#";
    for (std::size_t i = 0; i + 3 <= marked.size(); ++i) {
      feat = "t:";
      feat += marked.substr(i, 3);
      add(feat);
    }
  }

  double n = 0.0;
  for (double x : out.values) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0) throw std::runtime_error("embed: degenerate all-zero feature vector");
  for (double& x : out.values) x /= n;
  return out;
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cosine: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
  return s;
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  Vocabulary v;
  std::unordered_set<std::string> seen;
  for (const std::string& raw : words) {
    for (std::string& tok : normalize_text(raw)) {
      if (seen.insert(tok).second) v.words.push_back(std::move(tok));
    }
  }
  return v;
}

Vocabulary Vocabulary::from_corpus(std::span<const std::string> texts) {
  return from_words(texts);
}

}  // namespace neurotext
