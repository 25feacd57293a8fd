#include "qfusion/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qfusion {
namespace {

constexpr double kCosineOffset = 0.008;
constexpr double kKeepFloor = 1e-3;

void check_logits(std::span<const double> logits) {
  bool any_finite = false;
  for (double v : logits) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) throw Error("non-finite logit");
    any_finite = any_finite || std::isfinite(v);
  }
  if (!any_finite) throw Error("all logits masked");
}

void check_step(int t, const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.total_steps()) {
    throw Error("diffusion step " + std::to_string(t) + " outside [1, " + std::to_string(schedule.total_steps()) + "]");
  }
}

}  // namespace

NoiseSchedule::NoiseSchedule(int total_steps) {
  if (total_steps < 1) throw Error("noise schedule needs at least one step");
  auto f = [&](int t) {
    const double x = (static_cast<double>(t) / total_steps + kCosineOffset) / (1.0 + kCosineOffset);
    const double c = std::cos(x * std::numbers::pi / 2);
    return c * c;
  };
  keep_.resize(static_cast<std::size_t>(total_steps) + 1);
  for (int t = 0; t <= total_steps; ++t) {
    keep_[static_cast<std::size_t>(t)] = kKeepFloor + (1.0 - kKeepFloor) * f(t) / f(0);
  }
  keep_[0] = 1.0;
}

NoiseSchedule NoiseSchedule::from_keep_probabilities(std::vector<double> keep) {
  if (keep.size() < 2 || keep[0] != 1.0) throw Error("noise schedule must start at 1");
  for (std::size_t t = 1; t < keep.size(); ++t) {
    if (!(keep[t] > 0.0 && keep[t] < keep[t - 1])) throw Error("noise schedule must be strictly decreasing in (0, 1]");
  }
  NoiseSchedule s(1);
  s.keep_ = std::move(keep);
  return s;
}

CategoricalVar q_sample(CategoricalVar x0, int t, const NoiseSchedule& schedule, Rng& rng) {
  check_step(t, schedule);
  if (uniform01(rng) < schedule.keep(t)) return x0;
  return {x0.vocab_size, static_cast<int>(uniform_index(rng, static_cast<std::size_t>(x0.vocab_size)))};
}

std::vector<double> forward_marginal(CategoricalVar x0, int t, const NoiseSchedule& schedule) {
  const double keep = schedule.keep(t);
  std::vector<double> p(static_cast<std::size_t>(x0.vocab_size), (1.0 - keep) / x0.vocab_size);
  p[static_cast<std::size_t>(x0.value)] += keep;
  return p;
}

std::vector<double> softmax(std::span<const double> logits) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : logits) hi = std::max(hi, v);
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - hi);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<double> posterior_probabilities(std::span<const double> x0_logits, CategoricalVar xt, int t,
                                            const NoiseSchedule& schedule) {
  check_step(t, schedule);
  check_logits(x0_logits);
  const std::vector<double> p0 = softmax(x0_logits);
  if (t == 1) return p0;

  const auto k = static_cast<double>(xt.vocab_size);
  const double keep_t = schedule.keep(t), keep_prev = schedule.keep(t - 1), step = schedule.step_keep(t);
  const auto i = static_cast<std::size_t>(xt.value);

  // w_c = p0_c / q(x_t = i | x0 = c)
  std::vector<double> w(p0.size());
  double w_total = 0.0;
  for (std::size_t c = 0; c < p0.size(); ++c) {
    w[c] = p0[c] / (keep_t * (c == i ? 1.0 : 0.0) + (1.0 - keep_t) / k);
    w_total += w[c];
  }
  std::vector<double> out(p0.size());
  double total = 0.0;
  for (std::size_t j = 0; j < p0.size(); ++j) {
    const double transition = step * (j == i ? 1.0 : 0.0) + (1.0 - step) / k;
    const double prior = keep_prev * w[j] + (1.0 - keep_prev) / k * w_total;
    out[j] = transition * prior;
    total += out[j];
  }
  for (double& v : out) v /= total;
  return out;
}

CategoricalVar posterior_step(std::span<const double> x0_logits, CategoricalVar xt, int t,
                              const NoiseSchedule& schedule, Rng& rng) {
  return {xt.vocab_size, sample_categorical(posterior_probabilities(x0_logits, xt, t, schedule), rng)};
}

double ce_loss(std::span<const double> logits, int target) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : logits) hi = std::max(hi, v);
  double total = 0.0;
  for (double v : logits) total += std::exp(v - hi);
  return std::max(0.0, hi + std::log(total) - logits[static_cast<std::size_t>(target)]);
}

std::vector<double> ce_loss_gradient(std::span<const double> logits, int target) {
  std::vector<double> g = softmax(logits);
  g[static_cast<std::size_t>(target)] -= 1.0;
  return g;
}

int sample_categorical(std::span<const double> probabilities, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i] > 0.0) last_positive = static_cast<int>(i);
    acc += probabilities[i];
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace qfusion
