#include "neurotext/embedder.hpp"

#include "neurotext/synthdata.hpp"

#include <doctest.h>

#include <cmath>

using namespace neurotext;

TEST_CASE("normalize_text splits on non-alphanumeric runs and lowercases") {
  CHECK(normalize_text("The dog, ran!") == std::vector<std::string>{"the", "dog", "ran"});
  CHECK(normalize_text("") == std::vector<std::string>{});
  CHECK(normalize_text("A  b") == std::vector<std::string>{"a", "b"});
  CHECK(normalize_text("x3 -- y7") == std::vector<std::string>{"x3", "y7"});
}

TEST_CASE("feature hash is pinned for the default seed") {
  const EmbedderConfig cfg;
  // values computed with an independent reference implementation
  const std::uint64_t h = feature_hash("u:dog", cfg.hash_seed);
  CHECK(h == 0x6cfe8e359f03c6deULL);
  CHECK((h >> 1) % 64 == 47);
  CHECK((h & 1) == 0);  // negative sign
  const std::uint64_t h2 = feature_hash("t:#do", cfg.hash_seed);
  CHECK((h2 >> 1) % 64 == 60);
  CHECK((h2 & 1) == 1);  // positive sign
}

TEST_CASE("embed('dog') matches the reference hasher bucket by bucket") {
  const Embedding e = embed("dog");
  REQUIRE(e.dim() == 64);
  for (std::size_t i = 0; i < 64; ++i) {
    if (i == 27 || i == 28 || i == 47) {
      CHECK(e.values[i] == doctest::Approx(-0.5).epsilon(1e-12));
    } else if (i == 60) {
      CHECK(e.values[i] == doctest::Approx(0.5).epsilon(1e-12));
    } else {
      CHECK(e.values[i] == 0.0);
    }
  }
}

TEST_CASE("embeddings are unit norm and deterministic") {
  for (const char* text : {"dog", "the quick brown fox", "a b c d e f", "numbers 12 34"}) {
    const Embedding e = embed(text);
    double n = 0.0;
    for (double x : e.values) n += x * x;
    CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
    const Embedding again = embed(text);
    CHECK(e.values == again.values);  // bit-identical
  }
}

TEST_CASE("uniformly repeated words do not change the embedding") {
  CHECK(cosine(embed("dog dog"), embed("dog")) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pinned cosine pair: shared-word overlap orders as expected") {
  // values computed with the reference hasher before the build
  const double c12 = cosine(embed("the dog ran"), embed("the cat ran"));
  const double c13 = cosine(embed("the dog ran"), embed("the dog ran home"));
  CHECK(c12 == doctest::Approx(0.6390096504226939).epsilon(1e-12));
  CHECK(c13 == doctest::Approx(0.8436614877321076).epsilon(1e-12));
  CHECK(c12 < c13);
}

TEST_CASE("word order is invisible to the bag embedder") {
  const Embedding ab = embed("a b");
  const Embedding ba = embed("b a");
  CHECK(ab.values == ba.values);  // reorder invariance is exact
  CHECK(cosine(ab, ba) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cosine on explicit unit vectors") {
  Embedding ex, ey, mx;
  ex.values = {1.0, 0.0, 0.0};
  ey.values = {0.0, 1.0, 0.0};
  mx.values = {-1.0, 0.0, 0.0};
  CHECK(cosine(ex, ex) == 1.0);
  CHECK(cosine(ex, mx) == -1.0);
  CHECK(cosine(ex, ey) == 0.0);
}

TEST_CASE("empty text is rejected") {
  CHECK_THROWS_AS(embed(""), std::invalid_argument);
  CHECK_THROWS_AS(embed("..!!"), std::invalid_argument);
}

TEST_CASE("default grammar words embed distinctly (no degenerate buckets)") {
  const GrammarSpec grammar = GrammarSpec::defaults();
  std::vector<std::string> words;
  words.insert(words.end(), grammar.subjects.begin(), grammar.subjects.end());
  words.insert(words.end(), grammar.verbs.begin(), grammar.verbs.end());
  words.insert(words.end(), grammar.objects.begin(), grammar.objects.end());
  words.insert(words.end(), grammar.modifiers.begin(), grammar.modifiers.end());
  REQUIRE(words.size() >= 12);

  std::vector<Embedding> es;
  for (const std::string& w : words) es.push_back(embed(w));
  double mean_abs = 0.0;
  for (const Embedding& e : es)
    for (double x : e.values) {
      CHECK(std::isfinite(x));
      mean_abs += std::abs(x);
    }
  CHECK(mean_abs > 0.0);
  for (std::size_t i = 0; i < es.size(); ++i)
    for (std::size_t j = i + 1; j < es.size(); ++j)
      CHECK(cosine(es[i], es[j]) < 1.0 - 1e-9);
}

TEST_CASE("vocabulary dedupes and normalizes") {
  const std::vector<std::string> raw = {"The dog", "dog ran!", "Cat"};
  const Vocabulary v = Vocabulary::from_words(raw);
  CHECK(v.words == std::vector<std::string>{"the", "dog", "ran", "cat"});
}
