#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cmnet::model {

// Component removals and information-flow blocks for ablation runs.
struct Ablations {
  bool no_slot_memory = false;
  bool no_intent_memory = false;
  bool no_local_calculation = false;
  bool no_global_recurrence = false;
  bool no_slot2int = false;  // intent feature: skip the first-round slot summary
  bool no_int2slot = false;  // slot feature: skip the first-round intent summary

  bool any() const;
  std::vector<std::string> names() const;
  // Sets the flag named e.g. "no-slot-memory"; false for unknown names.
  bool set(const std::string& name);
  friend bool operator==(const Ablations&, const Ablations&) = default;
};

const std::vector<std::string>& ablation_names();

struct ModelConfig {
  std::size_t hidden_size = 64;
  std::size_t blocks = 3;
  std::size_t word_dim = 300;
  std::size_t char_dim = 30;
  std::size_t char_filters = 100;
  double dropout = 0.5;
  bool tie_memories = true;
  bool gate_bias = true;
  Ablations ablations;
  // Negative-control fixture: corrupts the input-gate gradient.
  bool break_gate_gradient = false;

  std::size_t input_dim() const { return word_dim + char_filters; }
  // Throws ConfigError.
  void validate() const;
};

}  // namespace cmnet::model
