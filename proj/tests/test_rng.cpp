#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "odyssey/core/rng.hpp"
#include "odyssey/search/candidates.hpp"

using namespace odyssey;

TEST_CASE("keyed streams are reproducible and order-independent") {
  RngStream a = RngStream::keyed(42, StreamTag::candidate, 3, 5, 1);
  RngStream b = RngStream::keyed(42, StreamTag::candidate, 3, 5, 1);
  for (int i = 0; i < 16; ++i) REQUIRE(a.next_u64() == b.next_u64());

  // Different key components give different streams.
  RngStream c = RngStream::keyed(42, StreamTag::candidate, 3, 5, 2);
  RngStream d = RngStream::keyed(42, StreamTag::candidate, 3, 1, 5);
  RngStream a2 = RngStream::keyed(42, StreamTag::candidate, 3, 5, 1);
  REQUIRE(c.next_u64() != a2.next_u64());
  RngStream a3 = RngStream::keyed(42, StreamTag::candidate, 3, 5, 1);
  REQUIRE(d.next_u64() != a3.next_u64());
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
  RngStream rng(123);
  double mn = 1.0, mx = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mn = std::min(mn, u);
    mx = std::max(mx, u);
  }
  REQUIRE(mn < 0.01);
  REQUIRE(mx > 0.99);
}

TEST_CASE("draw_global: sigma=0 gives the zero vector") {
  RngStream rng(7);
  Vec z = draw_global(rng, 0.0, 8);
  for (double v : z) REQUIRE(v == 0.0);
}

TEST_CASE("draw_global: per-coordinate variance within the chi^2 sampling bound") {
  // 1e5 draws at sigma=2: sample variance concentrates around 4 with
  // std ~ sigma^2 sqrt(2/(n-1)).
  const int n = 100000;
  const double sigma = 2.0;
  RngStream rng = RngStream::keyed(2024, StreamTag::candidate, 0, 0, 0);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = sigma * rng.gaussian();
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n;
  double var = (sumsq - n * mean * mean) / (n - 1);
  double bound = 3.0 * sigma * sigma * std::sqrt(2.0 / (n - 1));
  REQUIRE(std::abs(var - sigma * sigma) < bound);
}

TEST_CASE("draw_global: same stream key twice gives identical vectors") {
  RngStream a = RngStream::keyed(9, StreamTag::candidate, 4, 2, 0);
  RngStream b = RngStream::keyed(9, StreamTag::candidate, 4, 2, 0);
  Vec za = draw_global(a, 1.5, 32);
  Vec zb = draw_global(b, 1.5, 32);
  REQUIRE(za == zb);
}

TEST_CASE("draw_local: lambda=0 returns the pivot exactly in both modes") {
  Vec pivot{1.0, -2.0, 3.0, 0.5};
  RngStream a(11), b(11);
  REQUIRE(draw_local(a, pivot, 0.0, 4, LocalMode::uniform_radius) == pivot);
  REQUIRE(draw_local(b, pivot, 0.0, 4, LocalMode::fixed_radius) == pivot);
}

TEST_CASE("draw_local: fixed-radius mean offset matches lambda*sqrt(2d)*E||g||") {
  // d=64, lambda=0.15; E||g|| = sqrt(2) Gamma(32.5)/Gamma(32) = 7.968812221998633.
  const int d = 64;
  const double lambda = 0.15;
  const double chi_mean = 7.968812221998633;
  const double expected = lambda * std::sqrt(2.0 * d) * chi_mean;
  Vec pivot(d, 0.0);
  RngStream rng(31337);
  double acc = 0.0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    Vec z = draw_local(rng, pivot, lambda, d, LocalMode::fixed_radius);
    acc += norm(z);
  }
  double mean = acc / trials;
  REQUIRE(std::abs(mean - expected) / expected < 0.02);
}

TEST_CASE("draw_local: uniform-radius mean offset is half the fixed-radius one") {
  // E[u] = lambda/2 for u ~ Unif(0, lambda), so the K-step drift matches
  // K E[u] sqrt(2d) = K lambda sqrt(d/2).
  const int d = 64;
  const double lambda = 0.2;
  Vec pivot(d, 0.0);
  RngStream a(555), b(556);
  double acc_u = 0.0, acc_f = 0.0;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) {
    acc_u += norm(draw_local(a, pivot, lambda, d, LocalMode::uniform_radius));
    acc_f += norm(draw_local(b, pivot, lambda, d, LocalMode::fixed_radius));
  }
  REQUIRE(std::abs(acc_u / acc_f - 0.5) < 0.02);
}
