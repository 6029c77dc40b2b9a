#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cmnet/autodiff/parameter.hpp"
#include "cmnet/autodiff/tape.hpp"

namespace cmnet::ad {

// Builds a scalar loss on the given tape, reading parameters from the store
// the checker was handed. Must be a pure function of the parameter values.
using LossBuilder = std::function<Var(Tape&)>;

struct ParameterCheck {
  std::string name;
  // Largest relative_error() over the entries.
  double max_rel_error = 0.0;
  // ||a - n|| / max(1e-8, ||a|| + ||n||) over the whole tensor.
  double norm_rel_error = 0.0;
  double max_abs_diff = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  std::size_t entries = 0;
  // Entries whose relative error reaches the checker's threshold.
  std::size_t failing_entries = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_norm_rel_error = 0.0;
  std::vector<ParameterCheck> parameters;
};

// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

// Compares backward() against central differences (f(x+eps) - f(x-eps)) / 2eps
// for every entry of every trainable parameter accepted by `filter`.
// Throws DeterminismError if two identical evaluations disagree.
// `threshold` only feeds ParameterCheck::failing_entries.
GradCheckReport grad_check(const LossBuilder& build, ParameterStore& params, double eps,
                           const std::function<bool(const std::string&)>& filter = {}, double threshold = 1e-4);

}  // namespace cmnet::ad
