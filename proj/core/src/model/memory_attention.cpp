#include "cmnet/model/memory_attention.hpp"

#include "cmnet/errors.hpp"
#include "cmnet/train/init.hpp"

namespace cmnet::model {

namespace {

ad::Var param_or_empty(ad::Tape& tape, const ad::Parameter* p) {
  return p ? tape.parameter(*p) : ad::Var{};
}

void record(AttentionTrace* trace, const AttentionResult& r, ad::Var memory) {
  if (!trace) return;
  trace->weights.push_back(r.weights.value());
  trace->summaries.push_back(r.summary.value());
  trace->memories.push_back(memory.value());
}

ad::Var deliberate(ad::Var hidden, ad::Var first_memory, ad::Var second_memory, ad::Var first_single,
                   ad::Var second_joint, bool block_first_round, AttentionTrace* trace) {
  if (!second_memory.valid()) throw ContractError("deliberate attention: missing target memory");
  ad::Var rough;
  if (block_first_round || !first_memory.valid()) {
    rough = hidden.tape().constant(ad::Tensor::zeros(hidden.rows(), second_memory.cols()));
  } else {
    auto first = attend(hidden, first_memory, first_single);
    record(trace, first, first_memory);
    rough = first.summary;
  }
  auto second = attend(ad::concat({hidden, rough}, 1), second_memory, second_joint);
  record(trace, second, second_memory);
  return second.summary;
}

}  // namespace

std::string memory_label(MemoryKind kind) { return kind == MemoryKind::kSlot ? "slot" : "intent"; }

MemoryBank::MemoryBank(ad::ParameterStore& store, MemoryKind kind, std::size_t cells,
                       std::size_t hidden, std::uint64_t seed)
    : kind_(kind) {
  if (cells == 0) throw ContractError("memory bank '" + memory_label(kind) + "' needs at least one cell");
  cells_ = &train::add_weight(store, "memory." + memory_label(kind), cells, hidden, seed);
}

AttentionResult attend(ad::Var query, ad::Var memory, ad::Var bilinear) {
  if (!memory.valid()) throw ContractError("attend: empty memory");
  if (!query.valid() || !bilinear.valid()) throw ContractError("attend: missing query or weights");
  auto scores = ad::matmul_t(ad::matmul(query, bilinear), memory);
  auto weights = ad::softmax(scores, 1);
  return {weights, ad::matmul(weights, memory)};
}

ad::Var deliberate_slot_feature(ad::Var hidden, ad::Var intent_memory, ad::Var slot_memory,
                                ad::Var intent_single, ad::Var slot_joint, bool block_first_round,
                                AttentionTrace* trace) {
  return deliberate(hidden, intent_memory, slot_memory, intent_single, slot_joint, block_first_round, trace);
}

ad::Var deliberate_intent_feature(ad::Var hidden, ad::Var slot_memory, ad::Var intent_memory,
                                  ad::Var slot_single, ad::Var intent_joint, bool block_first_round,
                                  AttentionTrace* trace) {
  return deliberate(hidden, slot_memory, intent_memory, slot_single, intent_joint, block_first_round, trace);
}

DeliberateAttention::DeliberateAttention(ad::ParameterStore& store, const std::string& prefix,
                                         const ModelConfig& config, std::uint64_t seed)
    : ablations_(config.ablations) {
  const std::size_t d = config.hidden_size;
  const bool slot = !ablations_.no_slot_memory;
  const bool intent = !ablations_.no_intent_memory;
  if (slot) slot_joint_ = &train::add_weight(store, prefix + ".att.slot.joint", 2 * d, d, seed);
  if (intent) intent_joint_ = &train::add_weight(store, prefix + ".att.intent.joint", 2 * d, d, seed);
  if (slot && intent) {
    slot_single_ = &train::add_weight(store, prefix + ".att.slot.single", d, d, seed);
    intent_single_ = &train::add_weight(store, prefix + ".att.intent.single", d, d, seed);
  }
}

DeliberateAttention::Features DeliberateAttention::apply(ad::Tape& tape, ad::Var hidden,
                                                         const MemoryBank* slot_memory,
                                                         const MemoryBank* intent_memory,
                                                         AttentionTrace* trace) const {
  ad::Var slot_cells = slot_memory ? tape.parameter(slot_memory->cells()) : ad::Var{};
  ad::Var intent_cells = intent_memory ? tape.parameter(intent_memory->cells()) : ad::Var{};
  Features out;
  // Both features read the same incoming states; neither sees the other.
  if (slot_cells.valid()) {
    out.slot = deliberate_slot_feature(hidden, intent_cells, slot_cells, param_or_empty(tape, intent_single_),
                                       tape.parameter(*slot_joint_), ablations_.no_int2slot, trace);
  }
  if (intent_cells.valid()) {
    out.intent = deliberate_intent_feature(hidden, slot_cells, intent_cells, param_or_empty(tape, slot_single_),
                                           tape.parameter(*intent_joint_), ablations_.no_slot2int, trace);
  }
  return out;
}

}  // namespace cmnet::model
