#include "cmnet/model/inference.hpp"

#include <string>

#include "cmnet/errors.hpp"

namespace cmnet::model {

ad::Var emission_scores(ad::Var hidden, ad::Var slot_features, ad::Var hidden_weight,
                        ad::Var slot_weight, ad::Var bias) {
  auto scores = ad::matmul_t(hidden, hidden_weight);
  if (slot_features.valid() != slot_weight.valid()) {
    throw ContractError("emission_scores: slot features and weight must both be present");
  }
  if (slot_features.valid()) scores = ad::add(scores, ad::matmul_t(slot_features, slot_weight));
  return ad::add(scores, bias);
}

ad::Var intent_logits(ad::Var hidden, ad::Var intent_features, ad::Var hidden_weight,
                      ad::Var intent_weight, ad::Var bias) {
  if (intent_features.valid() != intent_weight.valid()) {
    throw ContractError("intent_logits: intent features and weight must both be present");
  }
  auto logits = ad::matmul_t(ad::mean(hidden, 0), hidden_weight);
  if (intent_features.valid()) {
    logits = ad::add(logits, ad::matmul_t(ad::mean(intent_features, 0), intent_weight));
  }
  return ad::add(logits, bias);
}

ad::Var intent_cross_entropy(ad::Var logits, std::size_t gold) {
  if (logits.rows() != 1 || gold >= logits.cols()) {
    throw ContractError("intent_cross_entropy: gold label " + std::to_string(gold) + " out of range");
  }
  return ad::sub(ad::log_sum_exp(logits, 1), ad::slice(logits, 1, gold, 1));
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
}

ad::Var joint_loss(ad::Var slot_loss, ad::Var intent_loss, double lambda) {
  check_lambda(lambda);
  return ad::add(ad::scale(slot_loss, 1.0 - lambda), ad::scale(intent_loss, lambda));
}

std::size_t argmax(const ad::Tensor& row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

}  // namespace cmnet::model
