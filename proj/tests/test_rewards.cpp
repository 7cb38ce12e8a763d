#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "odyssey/models/synthetic.hpp"
#include "odyssey/rewards/rewards.hpp"

using namespace odyssey;
using Catch::Approx;

namespace {

Vec solid_rgb(const SyntheticImageSpec& spec, double r, double g, double b) {
  Vec v(static_cast<std::size_t>(spec.dim()));
  int plane = spec.height * spec.width;
  for (int i = 0; i < plane; ++i) {
    v[static_cast<std::size_t>(i)] = r;
    v[static_cast<std::size_t>(plane + i)] = g;
    v[static_cast<std::size_t>(2 * plane + i)] = b;
  }
  return v;
}

const SyntheticImageSpec kSpec{3, 8, 8};

}  // namespace

TEST_CASE("brightness: luminance coefficients are exactly 0.2126 / 0.7152 / 0.0722") {
  BrightnessReward reward(kSpec);
  REQUIRE(reward.score(solid_rgb(kSpec, 1, 1, 1), 0) == Approx(1.0).epsilon(1e-12));
  REQUIRE(reward.score(solid_rgb(kSpec, 1, 0, 0), 0) == Approx(0.2126).epsilon(1e-12));
  REQUIRE(reward.score(solid_rgb(kSpec, 0, 1, 0), 0) == Approx(0.7152).epsilon(1e-12));
  REQUIRE(reward.score(solid_rgb(kSpec, 0, 0, 1), 0) == Approx(0.0722).epsilon(1e-12));
}

TEST_CASE("brightness: inputs clamped before the luminance formula") {
  BrightnessReward reward(kSpec);
  REQUIRE(reward.score(solid_rgb(kSpec, 7.0, -3.0, 0.5), 0) ==
          Approx(0.2126 + 0.0722 * 0.5).epsilon(1e-12));
}

TEST_CASE("brightness: requires three channels") {
  REQUIRE_THROWS_AS(BrightnessReward(SyntheticImageSpec{1, 8, 8}), ConfigError);
}

TEST_CASE("compressibility: constant image scores near 1") {
  // Measured: a constant 192-byte image deflates to 12 bytes.
  CompressibilityReward reward(kSpec, 203);
  double r = reward.score(Vec(192, 0.5), 0);
  REQUIRE(r == Approx(1.0 - 12.0 / 203.0).margin(0.02));
  REQUIRE(r > 0.9);
}

TEST_CASE("compressibility: uniform-noise byte count matches the measured golden band") {
  // Golden: mean b = 203 over 100 seeded uniform images at d=192 (raw size
  // 192 plus stream overhead; incompressible). Band allows small
  // zlib-version drift.
  double sum = 0.0;
  for (int i = 0; i < 100; ++i) {
    RngStream rng = RngStream::keyed(808, StreamTag::calibration, static_cast<std::uint64_t>(i));
    Vec img(192);
    for (auto& v : img) v = rng.uniform();
    sum += static_cast<double>(deflate_byte_count(img));
  }
  double mean_b = sum / 100.0;
  REQUIRE(mean_b == Approx(203.0).margin(10.0));
  // Reward at the calibrated default b_max=203 is pinned at the clamp.
  CompressibilityReward reward(kSpec, 203);
  RngStream rng = RngStream::keyed(808, StreamTag::calibration, 0);
  Vec img(192);
  for (auto& v : img) v = rng.uniform();
  REQUIRE(reward.score(img, 0) == Approx(0.0).margin(0.05));
}

TEST_CASE("compressibility: growing noise amplitude never increases the reward") {
  CompressibilityReward reward(kSpec, 203);
  double amps[] = {0.0, 0.02, 0.05, 0.1, 0.2, 0.5};
  double prev = 2.0;
  for (double amp : amps) {
    double acc = 0.0;
    for (int s = 0; s < 20; ++s) {
      RngStream rng = RngStream::keyed(909, StreamTag::calibration, static_cast<std::uint64_t>(s),
                                       static_cast<std::uint64_t>(amp * 1000));
      Vec img(192, 0.5);
      for (auto& v : img) v += amp * (2.0 * rng.uniform() - 1.0);
      acc += reward.score(img, 0);
    }
    double mean = acc / 20.0;
    REQUIRE(mean <= prev + 1e-12);
    prev = mean;
  }
}

TEST_CASE("compressibility: b_max calibration is deterministic and positive") {
  GmmModel m = make_benchmark_model();
  REQUIRE(calibrate_b_max(m) == calibrate_b_max(m));
  REQUIRE(calibrate_b_max(m) > 0);
}

TEST_CASE("classifier reward: single context model always scores 1") {
  GmmModel m = make_single_gaussian({0.2}, 0.4);
  ClassifierReward reward(m);
  REQUIRE(reward.score({123.0}, 0) == 1.0);
}

TEST_CASE("classifier reward: wrong mode of a well-separated model scores < 0.01") {
  // Separation 8 units = 8 tau with tau = 1.
  GmmModel m({{{-4.0}, 0.5, 1.0}, {{4.0}, 0.5, 1.0}}, {"lo", "hi"}, {{1.0, 0.0}, {0.0, 1.0}});
  ClassifierReward reward(m);
  REQUIRE(reward.score({4.0}, 0) < 0.01);
  REQUIRE(reward.score({4.0}, 1) > 0.99);
  REQUIRE(reward.score({0.0}, 0) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mode_distance: exact values and Lipschitz bound") {
  ModeDistanceReward at_target({1.0, 2.0}, 1.0);
  REQUIRE(at_target.score({1.0, 2.0}, 0) == 1.0);
  // ||x - mu||^2 = 2, s = 1 -> e^{-1}.
  REQUIRE(at_target.score({2.0, 3.0}, 0) == Approx(0.36787944117144233).epsilon(1e-12));

  // Empirical Lipschitz constant stays below the analytic max gradient 1/(s sqrt(e)).
  const double s = 0.7;
  ModeDistanceReward reward(Vec(4, 0.0), s);
  RngStream rng(515151);
  double max_ratio = 0.0;
  for (int i = 0; i < 20000; ++i) {
    Vec x = rng.gaussian_vector(4, 1.5);
    Vec y = rng.gaussian_vector(4, 1.5);
    double num = std::abs(reward.score(x, 0) - reward.score(y, 0));
    double den = distance(x, y);
    if (den > 0.0) max_ratio = std::max(max_ratio, num / den);
  }
  REQUIRE(max_ratio <= 1.0 / (s * std::exp(0.5)) + 1e-6);
}

TEST_CASE("registry: constructs each reward and rejects bad specs") {
  GmmModel m = make_benchmark_model();
  REQUIRE(make_reward("brightness", m)->name() == "brightness");
  REQUIRE(make_reward("compressibility:b_max=3000", m)->name() == "compressibility");
  REQUIRE(make_reward("classifier", m)->requires_context());
  RewardPtr md = make_reward("mode_distance:target_component=0,s=1.0", m);
  REQUIRE(md->score(m.components()[0].mean, 0) == 1.0);

  REQUIRE_THROWS_AS(make_reward("nope", m), ConfigError);
  REQUIRE_THROWS_AS(make_reward("mode_distance:s=abc", m), ConfigError);
  REQUIRE_THROWS_AS(make_reward("mode_distance:target_component=99", m), ConfigError);
  REQUIRE_THROWS_AS(make_reward("mode_distance:junk", m), ConfigError);
  GmmModel no_image = make_single_gaussian({0.0}, 0.5);
  REQUIRE_THROWS_AS(make_reward("brightness", no_image), ConfigError);
}

TEST_CASE("all rewards clamp any finite input into [0,1] (fuzz incl. 1e6 extremes)") {
  GmmModel m = make_benchmark_model();
  std::vector<RewardPtr> rewards = {
      make_reward("brightness", m),
      make_reward("compressibility", m),
      make_reward("classifier", m),
      make_reward("mode_distance:target_component=2,s=0.5", m),
  };
  RngStream rng(616161);
  for (int i = 0; i < 10000; ++i) {
    Vec x(192);
    double scale = (i % 10 == 0) ? 1e6 : (i % 3 == 0 ? 1e3 : 1.0);
    for (auto& v : x) v = scale * (2.0 * rng.uniform() - 1.0);
    ContextId c = i % m.context_count();
    for (const auto& r : rewards) {
      double sc = r->score(x, c);
      REQUIRE(std::isfinite(sc));
      REQUIRE(sc >= 0.0);
      REQUIRE(sc <= 1.0);
      REQUIRE(r->score(x, c) == sc);  // determinism
    }
  }
}
