#pragma once

#include "cmnet/autodiff/tape.hpp"
#include "cmnet/random.hpp"

namespace cmnet::model {

// Inverted dropout: keeps each entry with probability 1 - rate and scales
// survivors by 1 / (1 - rate). Absent at evaluation time.
class Dropout {
 public:
  Dropout(double rate, Rng& rng) : rate_(rate), rng_(&rng) {}

  double rate() const noexcept { return rate_; }
  ad::Tensor mask(std::size_t rows, std::size_t cols);
  ad::Var apply(ad::Var x);

 private:
  double rate_;
  Rng* rng_;
};

// Applies `dropout` when present and active.
ad::Var maybe_dropout(ad::Var x, Dropout* dropout);

}  // namespace cmnet::model
