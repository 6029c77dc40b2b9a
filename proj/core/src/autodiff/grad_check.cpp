#include "cmnet/autodiff/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cmnet/errors.hpp"

namespace cmnet::ad {

namespace {

double evaluate(const LossBuilder& build) {
  Tape tape(false);
  return build(tape).value().item();
}

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckReport grad_check(const LossBuilder& build, ParameterStore& params, double eps,
                           const std::function<bool(const std::string&)>& filter, double threshold) {
  if (!(eps > 0.0)) throw ContractError("grad_check: eps must be positive");

  const double first = evaluate(build);
  const double second = evaluate(build);
  if (first != second) {
    throw DeterminismError("grad_check: loss builder is not deterministic (" +
                           std::to_string(first) + " vs " + std::to_string(second) + ")");
  }

  Gradients analytic;
  {
    Tape tape;
    auto loss = build(tape);
    analytic = tape.backward(loss, params);
  }

  GradCheckReport report;
  for (auto& [name, param] : params) {
    if (!param.trainable) continue;
    if (filter && !filter(name)) continue;
    const Tensor& grad = analytic.at(name);
    ParameterCheck check{name};
    double diff_sq = 0.0, analytic_sq = 0.0, numeric_sq = 0.0;
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double original = param.value[i];
      param.value[i] = original + eps;
      const double up = evaluate(build);
      param.value[i] = original - eps;
      const double down = evaluate(build);
      param.value[i] = original;
      const double numeric = (up - down) / (2.0 * eps);
      diff_sq += (grad[i] - numeric) * (grad[i] - numeric);
      analytic_sq += grad[i] * grad[i];
      numeric_sq += numeric * numeric;
      const double rel = relative_error(grad[i], numeric);
      check.max_rel_error = std::max(check.max_rel_error, rel);
      check.failing_entries += rel >= threshold;
      check.max_abs_diff = std::max(check.max_abs_diff, std::abs(grad[i] - numeric));
      check.max_abs_analytic = std::max(check.max_abs_analytic, std::abs(grad[i]));
      check.max_abs_numeric = std::max(check.max_abs_numeric, std::abs(numeric));
    }
    check.entries = param.value.size();
    check.norm_rel_error = std::sqrt(diff_sq) / std::max(1e-8, std::sqrt(analytic_sq) + std::sqrt(numeric_sq));
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.max_norm_rel_error = std::max(report.max_norm_rel_error, check.norm_rel_error);
    report.parameters.push_back(std::move(check));
  }
  return report;
}

}  // namespace cmnet::ad
