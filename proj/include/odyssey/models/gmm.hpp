#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odyssey/core/rng.hpp"
#include "odyssey/core/types.hpp"
#include "odyssey/diffusion/denoiser.hpp"
#include "odyssey/diffusion/schedule.hpp"

namespace odyssey {

// Pixel-space interpretation of a d-vector, d = C*H*W.
struct SyntheticImageSpec {
  int channels = 0;
  int height = 0;
  int width = 0;
  int dim() const { return channels * height * width; }
};

struct GmmComponent {
  Vec mean;
  double weight = 1.0;  // marginal weight, used when no contexts are declared
  double tau = 0.0;     // isotropic per-component std, >= 0
};

// Gaussian-mixture data distribution with closed-form score, posterior mean,
// class posterior and ancestral sampling. Immutable after construction.
class GmmModel {
 public:
  GmmModel(std::vector<GmmComponent> components, std::vector<std::string> context_names,
           std::vector<Vec> context_weights, std::optional<SyntheticImageSpec> image = {})
      : components_(std::move(components)),
        context_names_(std::move(context_names)),
        context_weights_(std::move(context_weights)),
        image_(image) {
    if (components_.empty()) throw ConfigError("gmm: at least one component required");
    dim_ = static_cast<int>(components_.front().mean.size());
    for (const auto& c : components_) {
      if (static_cast<int>(c.mean.size()) != dim_) throw ConfigError("gmm: mean dimension mismatch");
      if (c.tau < 0.0) throw ConfigError("gmm: tau must be >= 0");
      if (!(c.weight > 0.0) && context_names_.empty())
        throw ConfigError("gmm: component weights must be positive");
    }
    if (context_names_.empty()) {
      context_names_ = {"default"};
      Vec w(components_.size());
      for (std::size_t k = 0; k < components_.size(); ++k) w[k] = components_[k].weight;
      context_weights_ = {std::move(w)};
    }
    if (context_weights_.size() != context_names_.size())
      throw ConfigError("gmm: context name/weight count mismatch");
    for (auto& w : context_weights_) {
      if (w.size() != components_.size())
        throw ConfigError("gmm: context weight vector length must equal component count");
      double s = 0.0;
      for (double v : w) {
        if (v < 0.0) throw ConfigError("gmm: context weights must be >= 0");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-6) throw ConfigError("gmm: context weights must sum to 1");
      if (std::abs(s - 1.0) > 1e-12)
        for (double& v : w) v /= s;
    }
    if (image_ && image_->dim() != dim_)
      throw ConfigError("gmm: image spec dimension does not match model dimension");
  }

  int dimension() const { return dim_; }
  const std::vector<GmmComponent>& components() const { return components_; }
  int context_count() const { return static_cast<int>(context_names_.size()); }
  const std::vector<std::string>& context_names() const { return context_names_; }
  const Vec& context_weights(ContextId c) const {
    return context_weights_[static_cast<std::size_t>(check_context(c))];
  }
  const std::optional<SyntheticImageSpec>& image_spec() const { return image_; }

  ContextId context_id(std::string_view name) const {
    for (std::size_t i = 0; i < context_names_.size(); ++i)
      if (context_names_[i] == name) return static_cast<ContextId>(i);
    throw ConfigError("gmm: unknown context '" + std::string(name) + "'");
  }

  // log p(x | sigma, c) of the sigma-convolved mixture, log-sum-exp stabilized.
  double log_density(const Vec& x, double sigma, ContextId c) const {
    std::vector<double> lt = log_terms(x, sigma, c);
    return logsumexp(lt);
  }

  void check_dimension(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim_)
      throw ConfigError("gmm: input dimension " + std::to_string(x.size()) +
                        " does not match model dimension " + std::to_string(dim_));
  }

  // Exact score: grad_x log sum_k w_k N(x; mu_k, (tau_k^2 + sigma^2) I).
  Vec score(const Vec& x, double sigma, ContextId c) const {
    std::vector<double> lt = log_terms(x, sigma, c);
    std::vector<double> resp = responsibilities(lt);
    Vec g(x.size(), 0.0);
    for (std::size_t k = 0; k < components_.size(); ++k) {
      if (resp[k] == 0.0) continue;
      const auto& comp = components_[k];
      double s2 = comp.tau * comp.tau + sigma * sigma;
      if (s2 == 0.0) continue;  // x == mean: contribution defined by limit, 0
      double coef = resp[k] / s2;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += coef * (comp.mean[i] - x[i]);
    }
    return g;
  }

  // Exact posterior mean E[x0 | x_sigma, c] = sum_k resp_k (tau_k^2 x + sigma^2 mu_k)/(tau_k^2+sigma^2).
  Vec posterior_mean(const Vec& x, double sigma, ContextId c) const {
    if (sigma == 0.0) return x;  // already clean
    std::vector<double> lt = log_terms(x, sigma, c);
    std::vector<double> resp = responsibilities(lt);
    Vec m(x.size(), 0.0);
    double s2n = sigma * sigma;
    for (std::size_t k = 0; k < components_.size(); ++k) {
      if (resp[k] == 0.0) continue;
      const auto& comp = components_[k];
      double t2 = comp.tau * comp.tau;
      double denom = t2 + s2n;
      for (std::size_t i = 0; i < m.size(); ++i)
        m[i] += resp[k] * (t2 * x[i] + s2n * comp.mean[i]) / denom;
    }
    return m;
  }

  // Bayes posterior P(c | x0) under a uniform prior over the declared
  // contexts, using the clean (sigma=0) conditional densities. When every
  // context density underflows to zero the posterior degenerates to uniform
  // and *degenerate is set.
  double class_posterior(const Vec& x0, ContextId c, bool* degenerate = nullptr) const {
    check_context(c);
    if (degenerate) *degenerate = false;
    std::vector<double> lg(context_names_.size());
    for (std::size_t i = 0; i < context_names_.size(); ++i) {
      std::vector<double> lt = log_terms(x0, 0.0, static_cast<ContextId>(i));
      lg[i] = logsumexp(lt);
    }
    double mx = *std::max_element(lg.begin(), lg.end());
    if (!std::isfinite(mx)) {
      if (degenerate) *degenerate = true;
      return 1.0 / static_cast<double>(context_names_.size());
    }
    double denom = 0.0;
    for (double v : lg) denom += std::exp(v - mx);
    return std::exp(lg[static_cast<std::size_t>(c)] - mx) / denom;
  }

  // Ancestral sample: categorical component draw, then Gaussian.
  Vec sample_clean(RngStream& rng, ContextId c) const {
    const Vec& w = context_weights(c);
    double u = rng.uniform();
    std::size_t k = 0;
    double acc = 0.0;
    for (; k < w.size(); ++k) {
      acc += w[k];
      if (u < acc) break;
    }
    if (k == w.size()) k = w.size() - 1;
    const auto& comp = components_[k];
    Vec x = comp.mean;
    if (comp.tau > 0.0)
      for (auto& v : x) v += comp.tau * rng.gaussian();
    return x;
  }

 private:
  ContextId check_context(ContextId c) const {
    if (c < 0 || c >= context_count())
      throw ConfigError("gmm: context id " + std::to_string(c) + " out of range");
    return c;
  }

  // log w_k + log N(x; mu_k, (tau_k^2 + sigma^2) I) per component. Zero-variance
  // components resolve to +/-large sentinels depending on exact mean hit.
  std::vector<double> log_terms(const Vec& x, double sigma, ContextId c) const {
    static constexpr double kLogHalfTau = 0.91893853320467274178;  // 0.5 * log(2*pi)
    check_dimension(x);
    const Vec& w = context_weights(check_context(c));
    std::vector<double> lt(components_.size());
    for (std::size_t k = 0; k < components_.size(); ++k) {
      if (w[k] == 0.0) {
        lt[k] = -std::numeric_limits<double>::infinity();
        continue;
      }
      const auto& comp = components_[k];
      double s2 = comp.tau * comp.tau + sigma * sigma;
      if (s2 == 0.0) {
        lt[k] = (x == comp.mean) ? 1e300 : -std::numeric_limits<double>::infinity();
        continue;
      }
      double q = squared_distance(x, comp.mean) / (2.0 * s2);
      lt[k] = std::log(w[k]) - 0.5 * dim_ * std::log(s2) - dim_ * kLogHalfTau - q;
    }
    return lt;
  }

  static double logsumexp(const std::vector<double>& lt) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lt) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return -std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (double v : lt) s += std::exp(v - mx);
    return mx + std::log(s);
  }

  static std::vector<double> responsibilities(const std::vector<double>& lt) {
    std::vector<double> r(lt.size(), 0.0);
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lt) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return r;  // all-zero density: no responsibility anywhere
    double s = 0.0;
    for (std::size_t k = 0; k < lt.size(); ++k) {
      r[k] = std::exp(lt[k] - mx);
      s += r[k];
    }
    for (auto& v : r) v /= s;
    return r;
  }

  std::vector<GmmComponent> components_;
  std::vector<std::string> context_names_;
  std::vector<Vec> context_weights_;
  std::optional<SyntheticImageSpec> image_;
  int dim_ = 0;
};

// Denoiser adapter over the analytic model. For VP levels the latent is
// rescaled to the VE convolution frame: x_t = sqrt(a) x0 + sqrt(1-a) eps
// implies E[x0 | x_t] = posterior_mean(x_t / sqrt(a), sqrt((1-a)/a)).
class GmmDenoiser : public Denoiser {
 public:
  GmmDenoiser(const GmmModel& model, ScheduleKind kind) : model_(&model), kind_(kind) {}

  int dimension() const override { return model_->dimension(); }

  Vec posterior_mean(const Vec& latent, double level, ContextId context) const override {
    if (kind_ == ScheduleKind::VE) return model_->posterior_mean(latent, level, context);
    double a = level;
    if (!(a > 0.0) || a > 1.0) throw ConfigError("gmm denoiser: alpha level outside (0, 1]");
    if (a == 1.0) return latent;
    double inv_sqrt_a = 1.0 / std::sqrt(a);
    Vec rescaled = scaled(latent, inv_sqrt_a);
    return model_->posterior_mean(rescaled, std::sqrt((1.0 - a) / a), context);
  }

 private:
  const GmmModel* model_;
  ScheduleKind kind_;
};

}  // namespace odyssey
