#pragma once

#include <cstddef>

#include "cmnet/autodiff/tape.hpp"

namespace cmnet::model {

// P = H·Whᵀ + Hs·Wsᵀ + b. `slot_features` / `slot_weight` may both be
// invalid when the slot memory is ablated.
ad::Var emission_scores(ad::Var hidden, ad::Var slot_features, ad::Var hidden_weight,
                        ad::Var slot_weight, ad::Var bias);

// logits = U·mean_t[h_t; h_t^int] + b, as a 1 x intents row. As above the
// intent half may be absent.
ad::Var intent_logits(ad::Var hidden, ad::Var intent_features, ad::Var hidden_weight,
                      ad::Var intent_weight, ad::Var bias);

// -log softmax(logits)[gold]
ad::Var intent_cross_entropy(ad::Var logits, std::size_t gold);

// (1 - λ)·slot + λ·intent. Throws ConfigError unless λ ∈ [0, 1].
ad::Var joint_loss(ad::Var slot_loss, ad::Var intent_loss, double lambda);
void check_lambda(double lambda);

// Index of the largest entry; ties go to the smaller index.
std::size_t argmax(const ad::Tensor& row);

}  // namespace cmnet::model
