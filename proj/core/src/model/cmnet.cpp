#include "cmnet/model/cmnet.hpp"

#include "cmnet/errors.hpp"
#include "cmnet/model/crf.hpp"
#include "cmnet/model/inference.hpp"
#include "cmnet/train/init.hpp"

namespace cmnet::model {

CmNet::CmNet(const ModelConfig& config, data::Vocabulary vocab, const data::PretrainedEmbeddings& pretrained,
             std::uint64_t seed)
    : config_(config),
      vocab_(std::make_unique<data::Vocabulary>(std::move(vocab))),
      store_(std::make_unique<ad::ParameterStore>()) {
  config_.validate();
  const std::size_t d = config_.hidden_size;
  const std::size_t tags = vocab_->slots().size();
  const std::size_t intents = vocab_->intents().size();
  if (tags == 0 || intents == 0) throw ConfigError("training data has no slot tags or no intents");
  const auto& abl = config_.ablations;

  embedding_ = std::make_unique<EmbeddingLayer>(*store_, config_, *vocab_, pretrained, seed);
  if (!abl.no_slot_memory) slot_memory_.emplace(*store_, MemoryKind::kSlot, tags, d, seed);
  if (!abl.no_intent_memory) intent_memory_.emplace(*store_, MemoryKind::kIntent, intents, d, seed);
  blocks_.reserve(config_.blocks);
  for (std::size_t b = 0; b < config_.blocks; ++b) blocks_.emplace_back(*store_, b, config_, seed);

  transitions_ = &train::add_weight(*store_, "crf.transitions", tags + 2, tags + 2, seed);
  emission_hidden_ = &train::add_weight(*store_, "crf.emission.W", tags, d, seed);
  if (!abl.no_slot_memory && !config_.tie_memories) {
    emission_slot_ = &train::add_weight(*store_, "crf.emission.slot", tags, d, seed);
  }
  emission_bias_ = &train::add_bias(*store_, "crf.emission.b", tags);

  intent_hidden_ = &train::add_weight(*store_, "intent.W", intents, d, seed);
  if (!abl.no_intent_memory && !config_.tie_memories) {
    intent_feature_ = &train::add_weight(*store_, "intent.feature", intents, d, seed);
  }
  intent_bias_ = &train::add_bias(*store_, "intent.b", intents);
}

ad::Var CmNet::emission_weight(ad::Tape& tape) const {
  if (!slot_memory_) return {};
  return config_.tie_memories ? tape.parameter(slot_memory_->cells()) : tape.parameter(*emission_slot_);
}

ad::Var CmNet::intent_weight(ad::Tape& tape) const {
  if (!intent_memory_) return {};
  return config_.tie_memories ? tape.parameter(intent_memory_->cells()) : tape.parameter(*intent_feature_);
}

CmNet::Forward CmNet::forward(ad::Tape& tape, const EncodedUtterance& utt, Dropout* dropout,
                              bool keep_traces) const {
  auto embedded = embedding_->embed(tape, utt, dropout);
  Forward out;
  auto stack = run_stack(tape, blocks_, embedded.hidden, embedded.inputs,
                         slot_memory_ ? &*slot_memory_ : nullptr, intent_memory_ ? &*intent_memory_ : nullptr,
                         dropout, keep_traces ? &out.traces : nullptr);
  const auto hidden = stack.state.hidden;
  out.emissions = emission_scores(hidden, stack.slot_features, tape.parameter(*emission_hidden_),
                                  emission_weight(tape), tape.parameter(*emission_bias_));
  out.transitions = tape.parameter(*transitions_);
  out.intent_logits = intent_logits(hidden, stack.intent_features, tape.parameter(*intent_hidden_),
                                    intent_weight(tape), tape.parameter(*intent_bias_));
  return out;
}

CmNet::Loss CmNet::loss(ad::Tape& tape, const EncodedUtterance& utt, double lambda, Dropout* dropout) const {
  check_lambda(lambda);
  if (utt.slots.size() != utt.size() || !utt.intent) {
    throw ContractError("loss: utterance has labels outside the training inventories");
  }
  auto fwd = forward(tape, utt, dropout);
  Loss out;
  out.slot = crf_nll(fwd.emissions, fwd.transitions, utt.slots);
  out.intent = intent_cross_entropy(fwd.intent_logits, *utt.intent);
  out.total = joint_loss(out.slot, out.intent, lambda);
  return out;
}

CmNet::Prediction CmNet::predict(const data::Utterance& utt) const {
  ad::Tape tape(false);
  auto fwd = forward(tape, encode(utt));
  auto path = viterbi_decode(fwd.emissions.value(), fwd.transitions.value());
  Prediction out;
  for (auto id : path.tags) out.slot_tags.push_back(vocab_->slots().at(id));
  out.intent = vocab_->intents().at(argmax(fwd.intent_logits.value()));
  return out;
}

std::vector<ManifestEntry> CmNet::manifest() const {
  std::vector<ManifestEntry> out;
  for (const auto& [name, p] : *store_) out.push_back({name, p.value.rows(), p.value.cols(), p.trainable});
  return out;
}

}  // namespace cmnet::model
