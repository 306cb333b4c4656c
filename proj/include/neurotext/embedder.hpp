#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace neurotext {

// Shared semantic space: every sentence maps to one unit-norm vector of this
// dimension. All modules that embed text read the dimension and hash seed
// from this one struct.
struct EmbedderConfig {
  std::size_t dim = 64;
  std::uint64_t hash_seed = 0xD1B54A32D192ED03ULL;
};

// Unit-norm vector in the shared semantic space.
struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

// Lowercases and splits on runs of non-alphanumeric characters. Empty tokens
// are dropped; an empty result is allowed.
std::vector<std::string> normalize_text(std::string_view text);

// Signed-hashing bag embedder: word unigrams plus boundary-marked character
// trigrams, each hashed to a bucket and a sign, counts accumulated and
// L2-normalized. Deterministic for a fixed hash seed. ngram order is
// ignored by construction ("a b" and "b a" embed identically).
// Throws std::invalid_argument when the text has no tokens.
Embedding embed(std::string_view text, const EmbedderConfig& cfg = {});

// Dot product of two unit-norm embeddings.
double cosine(const Embedding& a, const Embedding& b);

// Feature hash (exposed so tests can pin bucket/sign assignments).
std::uint64_t feature_hash(std::string_view feature, std::uint64_t seed);

// Ordered list of unique normalized tokens; the search space for inversion
// and the proposal LM.
struct Vocabulary {
  std::vector<std::string> words;

  // Normalizes, dedupes (first occurrence wins) and validates.
  static Vocabulary from_words(std::span<const std::string> words);
  static Vocabulary from_corpus(std::span<const std::string> texts);

  std::size_t size() const { return words.size(); }
};

}  // namespace neurotext
