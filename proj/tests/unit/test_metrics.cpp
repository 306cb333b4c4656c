#include "neurotext/metrics.hpp"

#include "neurotext/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

using namespace neurotext;

TEST_CASE("bleu of a sentence with itself is exactly 1") {
  for (const char* s : {"the cat sat", "a", "one two three four five six"})
    CHECK(bleu(s, s) == 1.0);
}

TEST_CASE("pinned hand-computed bleu fixture") {
  // candidate "the the the" vs reference "the cat sat on the mat":
  // p1 = 2/3 (raw), p2 = 1/3, p3 = 1/2, p4 = 1/1, bp = exp(1 - 6/3)
  const double expected = 0.21239529438966132;
  CHECK(bleu("the the the", "the cat sat on the mat") ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("disjoint vocabularies score near zero") {
  CHECK(bleu("alpha beta gamma", "delta epsilon zeta") < 0.1);
}

TEST_CASE("empty candidate scores zero, empty reference throws") {
  CHECK(bleu("", "the cat") == 0.0);
  CHECK_THROWS_AS(bleu("the cat", ""), std::invalid_argument);
}

TEST_CASE("bleu stays within [0, 1] on random token soup") {
  Rng rng(42);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string cand, ref;
    const std::size_t nc = 1 + rng.below(8), nr = 1 + rng.below(8);
    for (std::size_t i = 0; i < nc; ++i) cand += pool[rng.below(pool.size())] + " ";
    for (std::size_t i = 0; i < nr; ++i) ref += pool[rng.below(pool.size())] + " ";
    const double b = bleu(cand, ref);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("semantic score basics") {
  CHECK(semantic_score("the dog ran", "the dog ran") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(semantic_score("dog the ran", "the dog ran") == doctest::Approx(1.0).epsilon(1e-9));
  // pinned pair from the embedder fixtures
  CHECK(semantic_score("the dog ran", "the cat ran") ==
        doctest::Approx(0.6390096504226939).epsilon(1e-12));
  CHECK(semantic_score("x y", "y x") == semantic_score("y x", "x y"));
  CHECK_THROWS_AS(semantic_score("", "the dog"), std::invalid_argument);
}

TEST_CASE("report aggregates are recomputable") {
  std::vector<SentenceScore> scores = {{0.5, 0.2}, {0.7, 0.4}, {0.9, 0.9}};
  const ScoreReport r = make_report(scores);
  CHECK(r.bleu_mean == doctest::Approx((0.5 + 0.7 + 0.9) / 3.0).epsilon(1e-15));
  CHECK(r.semantic_mean == doctest::Approx(0.5).epsilon(1e-15));
  const double sd = std::sqrt(((0.2 - 0.5) * (0.2 - 0.5) + (0.4 - 0.5) * (0.4 - 0.5) +
                               (0.9 - 0.5) * (0.9 - 0.5)) /
                              2.0);
  CHECK(r.semantic_sd == doctest::Approx(sd).epsilon(1e-15));
}

TEST_CASE("random control rejects a corpus of exact duplicates") {
  const std::vector<std::string> refs = {"the dog ran"};
  const std::vector<std::string> corpus = {"the dog ran", "the dog ran"};
  CHECK_THROWS_AS(random_control(refs, corpus, 1), std::invalid_argument);
}

TEST_CASE("random control is deterministic per seed") {
  const std::vector<std::string> refs = {"a b c", "d e f", "g h i"};
  const std::vector<std::string> corpus = {"a b c", "d e f", "g h i", "j k l", "m n o"};
  const ScoreReport r1 = random_control(refs, corpus, 7);
  const ScoreReport r2 = random_control(refs, corpus, 7);
  REQUIRE(r1.sentences.size() == r2.sentences.size());
  for (std::size_t i = 0; i < r1.sentences.size(); ++i) {
    CHECK(r1.sentences[i].bleu == r2.sentences[i].bleu);
    CHECK(r1.sentences[i].semantic == r2.sentences[i].semantic);
  }
}

TEST_CASE("random control over unrelated sentences centers near zero") {
  // seeded random letter soup: the empirical null of the hashed embedder
  Rng rng(77);
  auto random_word = [&rng]() {
    std::string w;
    for (int i = 0; i < 6; ++i) w.push_back(static_cast<char>('a' + rng.below(26)));
    return w;
  };
  std::vector<std::string> pool;
  for (int i = 0; i < 400; ++i) pool.push_back(random_word());
  auto random_sentence = [&]() {
    std::string s;
    for (int i = 0; i < 5; ++i) s += pool[rng.below(pool.size())] + " ";
    return s;
  };
  std::vector<std::string> refs, corpus;
  for (int i = 0; i < 200; ++i) refs.push_back(random_sentence());
  for (int i = 0; i < 400; ++i) corpus.push_back(random_sentence());

  const ScoreReport r = random_control(refs, corpus, 5);
  CHECK(std::abs(r.semantic_mean) < 0.2);
}

TEST_CASE("paired t-test rejects degenerate inputs") {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(paired_t_test(a, a), std::invalid_argument);  // zero variance
  const std::vector<double> b = {1.0, 2.0};
  CHECK_THROWS_AS(paired_t_test(b, b), std::invalid_argument);  // too short
  const std::vector<double> c = {1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(paired_t_test(a, c), std::invalid_argument);  // length mismatch
}

TEST_CASE("textbook paired t fixture: differences 1..5") {
  const std::vector<double> a = {2.0, 4.0, 6.0, 8.0, 10.0};
  const std::vector<double> b = {1.0, 2.0, 3.0, 4.0, 5.0};
  // t = 3 * sqrt(5) / sqrt(2.5) = 4.2426..., two-sided p with 4 dof
  const double p = paired_t_test(a, b);
  CHECK(p == doctest::Approx(0.013235599563682695).epsilon(1e-6));
  CHECK(paired_t_test(b, a) == p);  // two-sided symmetry
}

TEST_CASE("constant shift with tiny jitter is overwhelmingly significant") {
  Rng rng(3);
  std::vector<double> a(10), b(10);
  for (std::size_t i = 0; i < 10; ++i) {
    b[i] = rng.uniform();
    a[i] = b[i] + 1.0 + 1e-9 * rng.normal();  // jitter keeps the variance nonzero
  }
  CHECK(paired_t_test(a, b) < 1e-6);
}

TEST_CASE("spearman rank correlation") {
  const std::vector<double> x = {0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> inc = {0.1, 0.2, 0.35, 0.5, 0.9};
  const std::vector<double> dec = {0.9, 0.5, 0.35, 0.2, 0.1};
  CHECK(spearman(x, inc) == doctest::Approx(1.0));
  CHECK(spearman(x, dec) == doctest::Approx(-1.0));
  const std::vector<double> tied = {0.5, 0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(spearman(x, tied), std::invalid_argument);
}
