#pragma once

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "odyssey/core/rng.hpp"
#include "odyssey/core/types.hpp"
#include "odyssey/models/gmm.hpp"

namespace odyssey {

// Bounded black-box reward r(x0, c). Implementations clamp to [0,1], are
// deterministic, and never reject an input.
class RewardFn {
 public:
  virtual ~RewardFn() = default;
  virtual double score(const Vec& sample, ContextId context) const = 0;
  virtual std::string_view name() const = 0;
  virtual bool requires_context() const = 0;
};

using RewardPtr = std::shared_ptr<const RewardFn>;

inline double clamp01(double v) {
  if (!std::isfinite(v)) return 0.0;
  return std::min(1.0, std::max(0.0, v));
}

// Reinterprets a d-vector as a C x H x W image with values clamped to [0,1].
struct ImageView {
  const Vec* data;
  SyntheticImageSpec spec;

  double pixel(int c, int y, int x) const {
    std::size_t i = static_cast<std::size_t>((c * spec.height + y) * spec.width + x);
    return clamp01((*data)[i]);
  }
};

// Mean luminance, 0.2126 R + 0.7152 G + 0.0722 B per pixel.
class BrightnessReward final : public RewardFn {
 public:
  explicit BrightnessReward(SyntheticImageSpec spec) : spec_(spec) {
    if (spec_.channels != 3) throw ConfigError("brightness reward requires 3 channels");
  }

  double score(const Vec& sample, ContextId) const override {
    ImageView img{&sample, spec_};
    double acc = 0.0;
    for (int y = 0; y < spec_.height; ++y)
      for (int x = 0; x < spec_.width; ++x)
        acc += 0.2126 * img.pixel(0, y, x) + 0.7152 * img.pixel(1, y, x) +
               0.0722 * img.pixel(2, y, x);
    return clamp01(acc / (spec_.height * spec_.width));
  }

  std::string_view name() const override { return "brightness"; }
  bool requires_context() const override { return false; }

 private:
  SyntheticImageSpec spec_;
};

// Deterministic DEFLATE byte count of the 8-bit quantized image.
inline std::int64_t deflate_byte_count(const Vec& sample) {
  std::vector<unsigned char> raw(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i)
    raw[i] = static_cast<unsigned char>(std::lround(clamp01(sample[i]) * 255.0));
  uLongf out_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> out(out_len);
  int rc = compress2(out.data(), &out_len, raw.data(), static_cast<uLong>(raw.size()),
                     Z_BEST_COMPRESSION);
  if (rc != Z_OK) throw NumericError("deflate failed with zlib code " + std::to_string(rc));
  return static_cast<std::int64_t>(out_len);
}

// clamp(1 - b / b_max, 0, 1) where b is the DEFLATE-compressed byte count.
class CompressibilityReward final : public RewardFn {
 public:
  CompressibilityReward(SyntheticImageSpec spec, std::int64_t b_max) : spec_(spec), b_max_(b_max) {
    if (b_max_ <= 0) throw ConfigError("compressibility reward: b_max must be > 0");
  }

  double score(const Vec& sample, ContextId) const override {
    double b = static_cast<double>(deflate_byte_count(sample));
    return clamp01(1.0 - b / static_cast<double>(b_max_));
  }

  std::string_view name() const override { return "compressibility"; }
  bool requires_context() const override { return false; }
  std::int64_t b_max() const { return b_max_; }

 private:
  SyntheticImageSpec spec_;
  std::int64_t b_max_;
};

// Default b_max calibration: 95th percentile of compressed sizes over clean
// model samples, mirroring an empirical calibration on real data.
inline std::int64_t calibrate_b_max(const GmmModel& model, int samples = 50,
                                    std::uint64_t seed = 0xC0FFEE) {
  std::vector<std::int64_t> sizes;
  sizes.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    RngStream rng = RngStream::keyed(seed, StreamTag::calibration, static_cast<std::uint64_t>(i));
    ContextId c = i % model.context_count();
    sizes.push_back(deflate_byte_count(model.sample_clean(rng, c)));
  }
  std::sort(sizes.begin(), sizes.end());
  std::size_t idx = static_cast<std::size_t>(0.95 * (sizes.size() - 1));
  return std::max<std::int64_t>(1, sizes[idx]);
}

// Exact Bayes class posterior of the context under the analytic model.
class ClassifierReward final : public RewardFn {
 public:
  explicit ClassifierReward(const GmmModel& model) : model_(&model) {}

  double score(const Vec& sample, ContextId context) const override {
    return clamp01(model_->class_posterior(sample, context));
  }

  std::string_view name() const override { return "classifier"; }
  bool requires_context() const override { return true; }

 private:
  const GmmModel* model_;
};

// Smooth Lipschitz test reward exp(-||x - target||^2 / (2 s^2)); its gradient
// norm is bounded by 1/(s sqrt(e)).
class ModeDistanceReward final : public RewardFn {
 public:
  ModeDistanceReward(Vec target, double s) : target_(std::move(target)), s_(s) {
    if (!(s_ > 0.0)) throw ConfigError("mode_distance reward: s must be > 0");
  }

  double score(const Vec& sample, ContextId) const override {
    double q = squared_distance(sample, target_);
    return clamp01(std::exp(-q / (2.0 * s_ * s_)));
  }

  std::string_view name() const override { return "mode_distance"; }
  bool requires_context() const override { return false; }

 private:
  Vec target_;
  double s_;
};

namespace detail {

inline std::map<std::string, std::string> parse_reward_params(std::string_view text) {
  std::map<std::string, std::string> params;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                             : comma - pos);
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ConfigError("reward spec: expected 'key=value', got '" + std::string(item) + "'");
    params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return params;
}

inline double param_double(const std::map<std::string, std::string>& p, const std::string& key,
                           double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("reward spec: parameter '" + key + "' is not a number");
  }
}

}  // namespace detail

// Constructs a reward from "name" or "name:k=v,k=v". Known names:
// brightness, compressibility (b_max), classifier, mode_distance (target_component, s).
inline RewardPtr make_reward(const std::string& spec_text, const GmmModel& model) {
  std::string name = spec_text;
  std::map<std::string, std::string> params;
  if (std::size_t colon = spec_text.find(':'); colon != std::string::npos) {
    name = spec_text.substr(0, colon);
    params = detail::parse_reward_params(spec_text.substr(colon + 1));
  }

  auto require_image = [&]() -> SyntheticImageSpec {
    if (!model.image_spec())
      throw ConfigError("reward '" + name + "' requires a model with an image spec");
    return *model.image_spec();
  };

  if (name == "brightness") return std::make_shared<BrightnessReward>(require_image());
  if (name == "compressibility") {
    double b_max = detail::param_double(params, "b_max", 0.0);
    std::int64_t b = b_max > 0.0 ? static_cast<std::int64_t>(b_max) : calibrate_b_max(model);
    return std::make_shared<CompressibilityReward>(require_image(), b);
  }
  if (name == "classifier") return std::make_shared<ClassifierReward>(model);
  if (name == "mode_distance") {
    int target = static_cast<int>(detail::param_double(params, "target_component", 0.0));
    if (target < 0 || target >= static_cast<int>(model.components().size()))
      throw ConfigError("mode_distance reward: target_component out of range");
    double s = detail::param_double(params, "s", 1.0);
    return std::make_shared<ModeDistanceReward>(
        model.components()[static_cast<std::size_t>(target)].mean, s);
  }
  throw ConfigError("unknown reward '" + name + "'");
}

}  // namespace odyssey
