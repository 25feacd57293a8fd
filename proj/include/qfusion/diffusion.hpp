#pragma once

#include <span>
#include <vector>

#include "qfusion/error.hpp"
#include "qfusion/random.hpp"

namespace qfusion {

/// Keep probabilities abar_t for t = 0..T of a uniform-transition discrete
/// diffusion: q(x_t | x_0) = abar_t * delta(x_0) + (1 - abar_t) / K.
/// Cosine-shaped with a floor: abar_0 = 1, strictly decreasing, abar_T = 1e-3.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(int total_steps = 32);

  /// Rebuilds a stored schedule; throws Error if it breaks the invariants.
  static NoiseSchedule from_keep_probabilities(std::vector<double> keep);

  int total_steps() const { return static_cast<int>(keep_.size()) - 1; }
  double keep(int t) const { return keep_.at(static_cast<std::size_t>(t)); }
  /// One-step keep probability abar_t / abar_{t-1}, t >= 1.
  double step_keep(int t) const { return keep(t) / keep(t - 1); }
  const std::vector<double>& keep_probabilities() const { return keep_; }

 private:
  std::vector<double> keep_;
};

struct CategoricalVar {
  int vocab_size = 1;
  int value = 0;

  bool operator==(const CategoricalVar&) const = default;
};

/// Forward corruption: x0 with probability abar_t, else uniform over [0, K).
/// Throws Error unless 1 <= t <= T.
CategoricalVar q_sample(CategoricalVar x0, int t, const NoiseSchedule& schedule, Rng& rng);

/// Closed-form marginal of q_sample.
std::vector<double> forward_marginal(CategoricalVar x0, int t, const NoiseSchedule& schedule);

/// Distribution of x_{t-1} given x_t, marginalising x0 over softmax(logits)
/// with the uniform-kernel posterior q(x_{t-1} | x_t, x0). At t = 1 this is
/// softmax(logits) itself. Entries of -inf act as masks; NaN, +inf, or an
/// all -inf vector throw Error.
std::vector<double> posterior_probabilities(std::span<const double> x0_logits, CategoricalVar xt, int t,
                                            const NoiseSchedule& schedule);

CategoricalVar posterior_step(std::span<const double> x0_logits, CategoricalVar xt, int t,
                              const NoiseSchedule& schedule, Rng& rng);

std::vector<double> softmax(std::span<const double> logits);

/// -log softmax(logits)[target].
double ce_loss(std::span<const double> logits, int target);

/// d ce_loss / d logits = softmax(logits) - onehot(target).
std::vector<double> ce_loss_gradient(std::span<const double> logits, int target);

int sample_categorical(std::span<const double> probabilities, Rng& rng);

}  // namespace qfusion
