#pragma once

#include <cstddef>
#include <cstdint>

#include "cmnet/autodiff/parameter.hpp"

namespace cmnet::train {

// L2 norm over every tensor in `grads`.
double global_norm(const ad::Gradients& grads);

// Rescales all gradients by max_norm / norm when the global norm exceeds
// max_norm. Returns the norm before clipping.
double clip_global_norm(ad::Gradients& grads, double max_norm);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam moments, one pair per trainable parameter.
class AdamState {
 public:
  explicit AdamState(const ad::ParameterStore& params, AdamConfig config = {});

  std::uint64_t step() const noexcept { return step_; }
  const ad::Gradients& first_moment() const noexcept { return m_; }
  const ad::Gradients& second_moment() const noexcept { return v_; }

  // Updates every trainable parameter that has an entry in `grads`.
  // Throws DimensionError on shape mismatch.
  void apply(ad::ParameterStore& params, const ad::Gradients& grads, double lr);

 private:
  AdamConfig config_;
  ad::Gradients m_;
  ad::Gradients v_;
  std::uint64_t step_ = 0;
};

// lr0 · decay^epoch. Throws ConfigError unless lr0 > 0 and decay ∈ (0, 1].
double lr_schedule(double lr0, double decay, std::size_t epoch);

}  // namespace cmnet::train
