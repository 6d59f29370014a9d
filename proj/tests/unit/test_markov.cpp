#include <doctest.h>

#include <cmath>
#include <random>

#include "compstat/markov.hpp"
#include "compstat/rng.hpp"

using namespace compstat;
using doctest::Approx;

TEST_SUITE("markov") {

TEST_CASE("model validation") {
  MarkovModel bad = bernoulli_model(0.5);
  bad.transition = {0.5, 0.4};  // sums to 0.9
  CHECK_THROWS_AS(validate(bad), Error);
  bad.transition = {1.2, -0.2};
  CHECK_THROWS_AS(validate(bad), Error);
  bad.transition = {0.5, 0.25, 0.25};  // wrong shape
  CHECK_THROWS_AS(validate(bad), Error);
  MarkovModel init = binary_flip_model(0.1);
  init.initial = {0.5, 0.25};
  CHECK_THROWS_AS(validate(init), Error);
  init.initial = {0.25, 0.75};
  CHECK_NOTHROW(validate(init));
  CHECK_THROWS_AS(bernoulli_model(1.5), Error);
}

TEST_CASE("stationary law of the flip chain and an asymmetric chain") {
  const auto uniform = stationary_distribution(binary_flip_model(0.1));
  CHECK(uniform[0] == Approx(0.5).epsilon(1e-12));
  CHECK(uniform[1] == Approx(0.5).epsilon(1e-12));

  // rows: from 0 stay with 0.9; from 1 move uniformly -> pi = (5/6, 1/6)
  MarkovModel skewed = binary_flip_model(0.1);
  skewed.transition = {0.9, 0.1, 0.5, 0.5};
  const auto pi = stationary_distribution(skewed);
  CHECK(pi[0] == Approx(5.0 / 6.0).epsilon(1e-10));
  CHECK(pi[1] == Approx(1.0 / 6.0).epsilon(1e-10));

  // periodic alternator still has a unique stationary law
  const auto alt = stationary_distribution(binary_flip_model(1.0));
  CHECK(alt[0] == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("reducible chains are rejected") {
  // flip = 0: both states absorbing, two closed classes
  CHECK_THROWS_AS(stationary_distribution(binary_flip_model(0.0)), Error);
  CHECK_THROWS_AS(entropy_m(binary_flip_model(0.0), 1), Error);
}

TEST_CASE("entropy reference values") {
  CHECK(entropy_m(bernoulli_model(0.5), 0) == 1.0);
  CHECK(entropy_m(bernoulli_model(0.5), 3) == 1.0);
  CHECK(entropy_m(bernoulli_model(0.2), 0) == Approx(0.7219280948873623).epsilon(1e-12));
  CHECK(limit_entropy(binary_flip_model(0.1)) == Approx(0.4689955935892812).epsilon(1e-12));
  CHECK(limit_entropy(binary_flip_model(1.0)) == Approx(0.0).scale(1.0));
  // uniform stationary law: one unconditioned symbol is a fair coin
  CHECK(entropy_m(binary_flip_model(0.1), 0) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entropy is nonincreasing in the order") {
  // order-2 chain: next symbol repeats the symbol two steps back with noise
  MarkovModel m;
  m.alphabet = bernoulli_model(0.5).alphabet;
  m.order = 2;
  m.transition.assign(8, 0.0);
  const double noise = 0.15;
  for (std::size_t ctx = 0; ctx < 4; ++ctx) {
    const std::size_t two_back = ctx >> 1;  // high digit = older symbol
    m.transition[ctx * 2 + two_back] = 1.0 - noise;
    m.transition[ctx * 2 + (1 - two_back)] = noise;
  }
  double prev = 10.0;
  for (unsigned order = 0; order <= 4; ++order) {
    const double h = entropy_m(m, order);
    CHECK(h <= prev + 1e-12);
    prev = h;
  }
  CHECK(entropy_m(m, 2) == Approx(limit_entropy(m)).epsilon(1e-12));
  CHECK(entropy_m(m, 4) == Approx(limit_entropy(m)).epsilon(1e-12));
  const double hn = -noise * std::log2(noise) - (1 - noise) * std::log2(1 - noise);
  CHECK(limit_entropy(m) == Approx(hn).epsilon(1e-10));
  CHECK(entropy_m(m, 1) == Approx(1.0).epsilon(1e-10));  // one symbol back is independent
}

TEST_CASE("kl divergence") {
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75}, z{1.0, 0.0};
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(p, q) == Approx(0.20751874963942185).epsilon(1e-12));
  CHECK(std::isinf(kl_divergence(p, z)));
  CHECK(kl_divergence(z, p) == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(kl_divergence(std::vector<double>{0.5, 0.6}, p), Error);
  CHECK_THROWS_AS(kl_divergence(std::vector<double>{1.0}, p), Error);

  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(4), b(4);
    double sa = 0, sb = 0;
    for (int i = 0; i < 4; ++i) {
      a[i] = uniform01(rng) + 1e-4;
      b[i] = uniform01(rng) + 1e-4;
      sa += a[i];
      sb += b[i];
    }
    for (int i = 0; i < 4; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    CHECK(kl_divergence(a, b) >= 0.0);
  }
}

TEST_CASE("generation is deterministic and matches source statistics") {
  const auto m = bernoulli_model(0.2);
  const Sequence s1 = generate(m, 1000, 42);
  const Sequence s2 = generate(m, 1000, 42);
  CHECK(s1.data().size() == 1000);
  CHECK(std::equal(s1.data().begin(), s1.data().end(), s2.data().begin()));
  const Sequence s3 = generate(m, 1000, 43);
  CHECK(!std::equal(s1.data().begin(), s1.data().end(), s3.data().begin()));

  // law of large numbers: frequency of "1" within 5 sigma of 0.2
  const Sequence big = generate(m, 1000000, 7);
  std::size_t ones = 0;
  for (Symbol s : big.data()) ones += s;
  CHECK(static_cast<double>(ones) / 1e6 == Approx(0.2).epsilon(0.01));

  // deterministic source
  MarkovModel constant = bernoulli_model(1.0);
  const Sequence c = generate(constant, 100, 5);
  for (Symbol s : c.data()) CHECK(s == 1);

  CHECK_THROWS_AS(generate(m, 0, 1), Error);
}

TEST_CASE("flip chain alternates runs according to its parameter") {
  const Sequence s = generate(binary_flip_model(0.05), 200000, 11);
  std::size_t flips = 0;
  for (std::size_t i = 1; i < s.size(); ++i) flips += s[i] != s[i - 1] ? 1 : 0;
  CHECK(static_cast<double>(flips) / (s.size() - 1) == Approx(0.05).epsilon(0.05));
}

TEST_CASE("same_model compares content") {
  CHECK(same_model(bernoulli_model(0.2), bernoulli_model(0.2)));
  CHECK(!same_model(bernoulli_model(0.2), bernoulli_model(0.8)));
  CHECK(!same_model(bernoulli_model(0.2), binary_flip_model(0.2)));
}

TEST_CASE("seed derivation scatters streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(123, 456) == derive_seed(123, 456));
}

}  // TEST_SUITE
