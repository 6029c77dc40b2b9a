#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmnet/autodiff/tape.hpp"
#include "cmnet/model/config.hpp"

namespace cmnet::model {

enum class MemoryKind { kSlot, kIntent };

std::string memory_label(MemoryKind kind);  // "slot" / "intent"

// One learnable cell per label, stored as a cells x hidden matrix named
// "memory.<kind>".
class MemoryBank {
 public:
  MemoryBank(ad::ParameterStore& store, MemoryKind kind, std::size_t cells, std::size_t hidden,
             std::uint64_t seed);

  MemoryKind kind() const noexcept { return kind_; }
  const ad::Parameter& cells() const { return *cells_; }
  std::size_t size() const { return cells_->value.rows(); }

 private:
  MemoryKind kind_;
  const ad::Parameter* cells_;
};

struct AttentionResult {
  ad::Var weights;  // rows x cells, each row a probability simplex
  ad::Var summary;  // rows x hidden, weights · memory
};

// Bilinear attention, one query per row: score_i = qᵀ W m_i, softmax over
// cells, summary = Σ α_i m_i. `bilinear` is query_dim x hidden.
AttentionResult attend(ad::Var query, ad::Var memory, ad::Var bilinear);

// Attention weights seen during a forward pass, for invariant checks.
struct AttentionTrace {
  std::vector<ad::Tensor> weights;
  std::vector<ad::Tensor> summaries;
  std::vector<ad::Tensor> memories;
};

// Two-round retrieval. For the slot feature: a rough intent summary
// attend(h, M_int, intent_single), then attend([h; rough], M_slot, slot_joint).
// When `block_first_round` is set, or the first memory is absent (invalid
// Var), the rough summary is replaced by zeros.
ad::Var deliberate_slot_feature(ad::Var hidden, ad::Var intent_memory, ad::Var slot_memory,
                                ad::Var intent_single, ad::Var slot_joint, bool block_first_round,
                                AttentionTrace* trace = nullptr);

// Mirror image: rough slot summary, then the intent memory.
ad::Var deliberate_intent_feature(ad::Var hidden, ad::Var slot_memory, ad::Var intent_memory,
                                  ad::Var slot_single, ad::Var intent_joint, bool block_first_round,
                                  AttentionTrace* trace = nullptr);

// Per-block attention parameters. "single" maps a hidden-size query onto a
// memory, "joint" maps a concatenated [h; rough] query. Parameters whose
// memory is ablated away are not created.
class DeliberateAttention {
 public:
  DeliberateAttention(ad::ParameterStore& store, const std::string& prefix, const ModelConfig& config,
                      std::uint64_t seed);

  struct Features {
    ad::Var slot;    // invalid when the slot memory is ablated
    ad::Var intent;  // invalid when the intent memory is ablated
  };

  Features apply(ad::Tape& tape, ad::Var hidden, const MemoryBank* slot_memory,
                 const MemoryBank* intent_memory, AttentionTrace* trace = nullptr) const;

 private:
  Ablations ablations_;
  const ad::Parameter* slot_single_ = nullptr;
  const ad::Parameter* slot_joint_ = nullptr;
  const ad::Parameter* intent_single_ = nullptr;
  const ad::Parameter* intent_joint_ = nullptr;
};

}  // namespace cmnet::model
