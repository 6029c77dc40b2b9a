#include "cmnet/train/optimizer.hpp"

#include <cmath>
#include <string>

#include "cmnet/errors.hpp"

namespace cmnet::train {

double global_norm(const ad::Gradients& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (double v : g.data()) sq += v * v;
  }
  return std::sqrt(sq);
}

double clip_global_norm(ad::Gradients& grads, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip-norm must be positive");
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& [name, g] : grads) {
      for (double& v : g.data()) v *= factor;
    }
  }
  return norm;
}

AdamState::AdamState(const ad::ParameterStore& params, AdamConfig config) : config_(config) {
  for (const auto& [name, p] : params) {
    if (!p.trainable) continue;
    m_.emplace(name, ad::Tensor(p.value.shape()));
    v_.emplace(name, ad::Tensor(p.value.shape()));
  }
}

void AdamState::apply(ad::ParameterStore& params, const ad::Gradients& grads, double lr) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (const auto& [name, g] : grads) {
    auto& p = params.get(name);
    if (!p.trainable) continue;
    auto& m = m_.at(name);
    auto& v = v_.at(name);
    if (g.shape() != p.value.shape()) {
      throw DimensionError("adam: gradient for '" + name + "' has shape " + ad::shape_string(g.shape()));
    }
    auto value = p.value.data();
    auto md = m.data();
    auto vd = v.data();
    auto gd = g.data();
    for (std::size_t i = 0; i < gd.size(); ++i) {
      md[i] = config_.beta1 * md[i] + (1.0 - config_.beta1) * gd[i];
      vd[i] = config_.beta2 * vd[i] + (1.0 - config_.beta2) * gd[i] * gd[i];
      value[i] -= lr * (md[i] / c1) / (std::sqrt(vd[i] / c2) + config_.epsilon);
    }
  }
}

double lr_schedule(double lr0, double decay, std::size_t epoch) {
  if (!(lr0 > 0.0)) throw ConfigError("lr must be positive");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay-factor must lie in (0, 1]");
  return lr0 * std::pow(decay, static_cast<double>(epoch));
}

}  // namespace cmnet::train
