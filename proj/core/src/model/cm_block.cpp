#include "cmnet/model/cm_block.hpp"

#include <algorithm>
#include <cmath>

#include "cmnet/errors.hpp"
#include "cmnet/train/init.hpp"

namespace cmnet::model {

namespace {

ad::Var flatten(ad::Var x) { return ad::reshape(x, 1, x.rows() * x.cols()); }

ad::Var param_or_empty(ad::Tape& tape, const ad::Parameter* p) {
  return p ? tape.parameter(*p) : ad::Var{};
}

}  // namespace

BlockState local_calculation(const BlockState& prev, ad::Var inputs, ad::Var slot_features,
                             ad::Var intent_features, const std::array<GateWeights, 6>& gates,
                             GateTrace* trace, double input_gate_grad_factor) {
  if (!prev.hidden.valid() || !prev.cells.valid()) throw ContractError("local_calculation: missing state");
  const std::size_t n = prev.hidden.rows();
  const std::size_t d = prev.hidden.cols();
  if (n == 0) throw ContractError("local_calculation: empty sequence");
  if (inputs.rows() != n || prev.cells.rows() != n) {
    throw DimensionError("local_calculation: inputs, states and cells must share length");
  }

  std::vector<ad::Var> features = {ad::window3(prev.hidden), inputs};
  if (slot_features.valid()) features.push_back(slot_features);
  if (intent_features.valid()) features.push_back(intent_features);
  auto joined = ad::concat(features, 1);

  // All six gates in one product: rows [W1 W2 W3 W4] per gate, stacked.
  std::vector<ad::Var> rows, biases;
  for (const auto& g : gates) {
    std::vector<ad::Var> parts = {g.window, g.input};
    if (slot_features.valid()) {
      if (!g.slot.valid()) throw ContractError("local_calculation: slot features without slot weights");
      parts.push_back(g.slot);
    }
    if (intent_features.valid()) {
      if (!g.intent.valid()) throw ContractError("local_calculation: intent features without intent weights");
      parts.push_back(g.intent);
    }
    rows.push_back(ad::concat(parts, 1));
    if (g.bias.valid()) biases.push_back(g.bias);
  }
  auto pre = ad::matmul_t(joined, ad::concat(rows, 0));
  if (!biases.empty()) pre = ad::add(pre, ad::concat(biases, 1));
  auto gate = [&](std::size_t k) { return ad::slice(pre, 1, k * d, d); };

  auto in_hat = ad::sigmoid(gate(0));
  if (input_gate_grad_factor != 1.0) in_hat = ad::grad_scale(in_hat, input_gate_grad_factor);
  auto out_gate = ad::sigmoid(gate(1));
  auto forget_hat = ad::sigmoid(gate(2));
  auto left_hat = ad::sigmoid(gate(3));
  auto right_hat = ad::sigmoid(gate(4));
  auto candidate = ad::tanh(gate(5));

  // Softmax across the four gates at each (position, unit).
  auto stacked = ad::concat({flatten(in_hat), flatten(forget_hat), flatten(left_hat), flatten(right_hat)}, 0);
  auto normalized = ad::softmax(stacked, 0);
  auto unflatten = [&](std::size_t k) { return ad::reshape(ad::slice(normalized, 0, k, 1), n, d); };
  auto in_gate = unflatten(0), forget = unflatten(1), left = unflatten(2), right = unflatten(3);

  auto neighbours = ad::window3(prev.cells);
  auto c_left = ad::slice(neighbours, 1, 0, d);
  auto c_self = ad::slice(neighbours, 1, d, d);
  auto c_right = ad::slice(neighbours, 1, 2 * d, d);

  auto cells = ad::add(ad::add(ad::mul(forget, c_self), ad::mul(left, c_left)),
                       ad::add(ad::mul(right, c_right), ad::mul(in_gate, candidate)));
  auto hidden = ad::mul(out_gate, ad::tanh(cells));

  if (trace) {
    const auto& a = in_gate.value();
    const auto& b = forget.value();
    const auto& c = left.value();
    const auto& e = right.value();
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] + b[k] + c[k] + e[k] - 1.0));
    trace->normalization_error.push_back(worst);
  }
  return {hidden, cells};
}

ad::Var lstm_pass(ad::Var inputs, const LstmWeights& weights, bool reverse) {
  const std::size_t n = inputs.rows();
  const std::size_t units = weights.recurrent.cols();
  auto projected = ad::add(ad::matmul_t(inputs, weights.input), weights.bias);
  std::vector<ad::Var> outputs(n);
  ad::Var h, c;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    auto z = ad::slice(projected, 0, t, 1);
    if (h.valid()) z = ad::add(z, ad::matmul_t(h, weights.recurrent));
    auto i = ad::sigmoid(ad::slice(z, 1, 0, units));
    auto f = ad::sigmoid(ad::slice(z, 1, units, units));
    auto g = ad::tanh(ad::slice(z, 1, 2 * units, units));
    auto o = ad::sigmoid(ad::slice(z, 1, 3 * units, units));
    c = c.valid() ? ad::add(ad::mul(f, c), ad::mul(i, g)) : ad::mul(i, g);
    h = ad::mul(o, ad::tanh(c));
    outputs[t] = h;
  }
  return ad::concat(outputs, 0);
}

ad::Var global_recurrence(ad::Var local_hidden, const LstmWeights& forward, const LstmWeights& backward) {
  return ad::concat({lstm_pass(local_hidden, forward, false), lstm_pass(local_hidden, backward, true)}, 1);
}

CmBlock::CmBlock(ad::ParameterStore& store, std::size_t index, const ModelConfig& config,
                 std::uint64_t seed)
    : config_(config), attention_(store, "block." + std::to_string(index), config, seed) {
  const std::string prefix = "block." + std::to_string(index);
  const std::size_t d = config.hidden_size;
  const auto& abl = config.ablations;

  if (abl.no_local_calculation) {
    const std::size_t width = d * (1 + !abl.no_slot_memory + !abl.no_intent_memory);
    merge_weight_ = &train::add_weight(store, prefix + ".merge.W", d, width, seed);
    merge_bias_ = &train::add_bias(store, prefix + ".merge.b", d);
  } else {
    for (std::size_t g = 0; g < kGateNames.size(); ++g) {
      const std::string gp = prefix + ".gate." + kGateNames[g];
      gates_[g].window = &train::add_weight(store, gp + ".W1", d, 3 * d, seed);
      gates_[g].input = &train::add_weight(store, gp + ".W2", d, config.input_dim(), seed);
      if (!abl.no_slot_memory) gates_[g].slot = &train::add_weight(store, gp + ".W3", d, d, seed);
      if (!abl.no_intent_memory) gates_[g].intent = &train::add_weight(store, gp + ".W4", d, d, seed);
      if (config.gate_bias) gates_[g].bias = &train::add_bias(store, gp + ".b", d);
    }
  }

  if (!abl.no_global_recurrence) {
    const std::size_t units = d / 2;
    const char* dirs[] = {"fwd", "bwd"};
    for (std::size_t k = 0; k < 2; ++k) {
      const std::string lp = prefix + ".global." + dirs[k];
      lstm_[k].input = &train::add_weight(store, lp + ".Wx", 4 * units, d, seed);
      lstm_[k].recurrent = &train::add_weight(store, lp + ".Wh", 4 * units, units, seed);
      lstm_[k].bias = &train::add_bias(store, lp + ".b", 4 * units);
    }
  }
}

std::array<GateWeights, 6> CmBlock::gate_weights(ad::Tape& tape) const {
  std::array<GateWeights, 6> out;
  for (std::size_t g = 0; g < out.size(); ++g) {
    out[g] = {param_or_empty(tape, gates_[g].window), param_or_empty(tape, gates_[g].input),
              param_or_empty(tape, gates_[g].slot), param_or_empty(tape, gates_[g].intent),
              param_or_empty(tape, gates_[g].bias)};
  }
  return out;
}

LstmWeights CmBlock::lstm_weights(ad::Tape& tape, bool backward) const {
  const auto& p = lstm_[backward ? 1 : 0];
  return {param_or_empty(tape, p.input), param_or_empty(tape, p.recurrent), param_or_empty(tape, p.bias)};
}

CmBlock::Output CmBlock::apply(ad::Tape& tape, const BlockState& in, ad::Var inputs,
                               const MemoryBank* slot_memory, const MemoryBank* intent_memory,
                               Dropout* dropout, Trace* trace) const {
  const auto& abl = config_.ablations;
  auto features = attention_.apply(tape, in.hidden, abl.no_slot_memory ? nullptr : slot_memory,
                                   abl.no_intent_memory ? nullptr : intent_memory,
                                   trace ? &trace->attention : nullptr);
  BlockState local;
  if (abl.no_local_calculation) {
    std::vector<ad::Var> parts = {in.hidden};
    if (features.slot.valid()) parts.push_back(features.slot);
    if (features.intent.valid()) parts.push_back(features.intent);
    local.hidden = ad::tanh(ad::add(ad::matmul_t(ad::concat(parts, 1), tape.parameter(*merge_weight_)),
                                    tape.parameter(*merge_bias_)));
    local.cells = in.cells;
  } else {
    local = local_calculation(in, inputs, features.slot, features.intent, gate_weights(tape),
                              trace ? &trace->gates : nullptr, config_.break_gate_gradient ? 1.5 : 1.0);
  }
  ad::Var hidden = local.hidden;
  if (!abl.no_global_recurrence) {
    hidden = global_recurrence(hidden, lstm_weights(tape, false), lstm_weights(tape, true));
  }
  hidden = maybe_dropout(hidden, dropout);
  return {{hidden, local.cells}, features.slot, features.intent};
}

StackOutput run_stack(ad::Tape& tape, const std::vector<CmBlock>& blocks, ad::Var initial_hidden,
                      ad::Var inputs, const MemoryBank* slot_memory, const MemoryBank* intent_memory,
                      Dropout* dropout, std::vector<CmBlock::Trace>* traces) {
  if (blocks.empty()) throw ConfigError("run_stack: at least one block is required");
  BlockState state{initial_hidden,
                   tape.constant(ad::Tensor::zeros(initial_hidden.rows(), initial_hidden.cols()))};
  StackOutput out;
  for (const auto& block : blocks) {
    CmBlock::Trace* trace = nullptr;
    if (traces) trace = &traces->emplace_back();
    auto result = block.apply(tape, state, inputs, slot_memory, intent_memory, dropout, trace);
    state = result.state;
    out.slot_features = result.slot_features;
    out.intent_features = result.intent_features;
  }
  out.state = state;
  return out;
}

}  // namespace cmnet::model
