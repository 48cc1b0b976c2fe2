#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "clusterfeat/rng.hpp"

using clusterfeat::Rng;

TEST_CASE("same seed and stream reproduce the sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42, 1);
  Rng d(42, 2);
  bool all_equal = true;
  for (int i = 0; i < 100; ++i) all_equal &= (c.next_u64() == d.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("split is deterministic and order-insensitive to sibling draws") {
  Rng root(7);
  Rng a = root.split(3);
  root.next_u64();  // consuming from the parent must not move children
  Rng b = root.split(3);
  for (int i = 0; i < 20; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng two_step = root.split(1).split(2);
  Rng one_call = root.split(1, 2);
  for (int i = 0; i < 20; ++i) CHECK(two_step.next_u64() == one_call.next_u64());
}

TEST_CASE("split children do not collide") {
  Rng root(9);
  std::set<std::uint64_t> first_words;
  for (std::uint64_t k = 0; k < 64; ++k)
    first_words.insert(root.split(k).next_u64());
  CHECK(first_words.size() == 64);
}

TEST_CASE("uniform stays in range") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-2.5, 3.5);
    CHECK(u >= -2.5);
    CHECK(u < 3.5);
  }
}

TEST_CASE("uniform_int covers the whole closed range") {
  Rng rng(2);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t v = rng.uniform_int(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("fixed word costs per draw") {
  Rng rng(3);
  rng.uniform();
  CHECK(rng.words() == 2);
  rng.normal();
  CHECK(rng.words() == 6);
  rng.rademacher(0.25);
  CHECK(rng.words() == 8);
  rng.uniform(0.0, 5.0);
  CHECK(rng.words() == 10);
}

TEST_CASE("normal has the right first two moments") {
  Rng rng(4);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rademacher hits +1 with the requested probability") {
  Rng rng(5);
  const int n = 100000;
  const double p = 0.2;
  int plus = 0;
  for (int i = 0; i < n; ++i)
    if (rng.rademacher(p) > 0) ++plus;
  CHECK(static_cast<double>(plus) / n == doctest::Approx(p).epsilon(0.05));
}
