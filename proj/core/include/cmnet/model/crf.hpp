#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cmnet/autodiff/tape.hpp"

namespace cmnet::model {

// Linear-chain CRF over K tags. Emissions are N x K; transitions are
// (K + 2) x (K + 2) with row/column K the begin state and K + 1 the end
// state. Entries into the begin state or out of the end state are never
// read.
struct CrfShape {
  std::size_t tags;
  std::size_t bos() const { return tags; }
  std::size_t eos() const { return tags + 1; }
};

// Throws DimensionError unless emissions and transitions agree.
CrfShape check_crf_shapes(const ad::Tensor& emissions, const ad::Tensor& transitions);

// Path score: A(bos, y0) + Σ A(y_t, y_t+1) + A(y_N-1, eos) + Σ P(t, y_t).
double crf_score(const ad::Tensor& emissions, const ad::Tensor& transitions,
                 std::span<const std::size_t> tags);

// log Σ over all K^N paths of exp(score), by the forward algorithm.
double crf_log_partition(const ad::Tensor& emissions, const ad::Tensor& transitions);

struct ViterbiResult {
  std::vector<std::size_t> tags;
  double score = 0.0;
};

// Highest-scoring path. Ties go to the smaller tag id.
ViterbiResult viterbi_decode(const ad::Tensor& emissions, const ad::Tensor& transitions);

// Differentiable negative log-likelihood log Z - score(gold), with
// gradients from forward-backward marginals.
ad::Var crf_nll(ad::Var emissions, ad::Var transitions, std::vector<std::size_t> gold);

}  // namespace cmnet::model
