#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cmnet/autodiff/tape.hpp"
#include "cmnet/model/config.hpp"
#include "cmnet/model/dropout.hpp"
#include "cmnet/model/memory_attention.hpp"

namespace cmnet::model {

// Hidden and cell states for every position, N x hidden each.
struct BlockState {
  ad::Var hidden;
  ad::Var cells;
};

// Gate order used throughout: input, output, forget, left, right, candidate.
inline constexpr std::array<const char*, 6> kGateNames = {"i", "o", "f", "l", "r", "u"};

// Weights of one gate; `slot` / `intent` are invalid when that memory is
// ablated and `bias` when gate biases are disabled.
struct GateWeights {
  ad::Var window;  // hidden x 3·hidden
  ad::Var input;   // hidden x input_dim
  ad::Var slot;    // hidden x hidden
  ad::Var intent;  // hidden x hidden
  ad::Var bias;    // 1 x hidden
};

// Gate values of one local calculation, for invariant checks.
struct GateTrace {
  // max over positions and units of |i + f + l + r - 1|
  std::vector<double> normalization_error;
};

// Window-3 gated update. Every position reads only the previous layer's
// states: ξ_t = [h_{t-1}, h_t, h_{t+1}] (zeros past either end), five
// sigmoid gates plus a tanh candidate, (i, f, l, r) renormalised by a
// position-wise softmax, c_t = f⊙c_t + l⊙c_{t-1} + r⊙c_{t+1} + i⊙u and
// h_t = o⊙tanh(c_t).
BlockState local_calculation(const BlockState& prev, ad::Var inputs, ad::Var slot_features,
                             ad::Var intent_features, const std::array<GateWeights, 6>& gates,
                             GateTrace* trace = nullptr, double input_gate_grad_factor = 1.0);

// Standard LSTM cell parameters for one direction; gate rows ordered
// input, forget, candidate, output.
struct LstmWeights {
  ad::Var input;      // 4·units x input_dim
  ad::Var recurrent;  // 4·units x units
  ad::Var bias;       // 1 x 4·units
};

// Runs the sequence through an LSTM, backwards when `reverse` is set;
// outputs stay aligned with input positions.
ad::Var lstm_pass(ad::Var inputs, const LstmWeights& weights, bool reverse);

// Bidirectional recurrence; position t gets [forward_t ; backward_t].
ad::Var global_recurrence(ad::Var local_hidden, const LstmWeights& forward, const LstmWeights& backward);

// One CM-block with its own parameters, named "block.<index>.*".
class CmBlock {
 public:
  CmBlock(ad::ParameterStore& store, std::size_t index, const ModelConfig& config, std::uint64_t seed);

  struct Output {
    BlockState state;
    ad::Var slot_features;
    ad::Var intent_features;
  };

  struct Trace {
    AttentionTrace attention;
    GateTrace gates;
  };

  Output apply(ad::Tape& tape, const BlockState& in, ad::Var inputs, const MemoryBank* slot_memory,
               const MemoryBank* intent_memory, Dropout* dropout, Trace* trace = nullptr) const;

  std::array<GateWeights, 6> gate_weights(ad::Tape& tape) const;
  LstmWeights lstm_weights(ad::Tape& tape, bool backward) const;

 private:
  struct GateParams {
    const ad::Parameter* window = nullptr;
    const ad::Parameter* input = nullptr;
    const ad::Parameter* slot = nullptr;
    const ad::Parameter* intent = nullptr;
    const ad::Parameter* bias = nullptr;
  };
  struct LstmParams {
    const ad::Parameter* input = nullptr;
    const ad::Parameter* recurrent = nullptr;
    const ad::Parameter* bias = nullptr;
  };

  ModelConfig config_;
  DeliberateAttention attention_;
  std::array<GateParams, 6> gates_{};
  std::array<LstmParams, 2> lstm_{};
  // Replacement for the local calculation in the no-local-calculation ablation.
  const ad::Parameter* merge_weight_ = nullptr;
  const ad::Parameter* merge_bias_ = nullptr;
};

struct StackOutput {
  BlockState state;
  ad::Var slot_features;    // retrieved by the last block
  ad::Var intent_features;  // retrieved by the last block
};

// Applies the blocks in order starting from (H0, C0 = 0).
StackOutput run_stack(ad::Tape& tape, const std::vector<CmBlock>& blocks, ad::Var initial_hidden,
                      ad::Var inputs, const MemoryBank* slot_memory, const MemoryBank* intent_memory,
                      Dropout* dropout, std::vector<CmBlock::Trace>* traces = nullptr);

}  // namespace cmnet::model
