#include "cmnet/model/config.hpp"

#include "cmnet/errors.hpp"

namespace cmnet::model {

const std::vector<std::string>& ablation_names() {
  static const std::vector<std::string> names = {
      "no-slot-memory", "no-intent-memory", "no-local-calculation",
      "no-global-recurrence", "no-slot2int", "no-int2slot"};
  return names;
}

bool Ablations::any() const { return !names().empty(); }

std::vector<std::string> Ablations::names() const {
  const bool flags[] = {no_slot_memory,       no_intent_memory, no_local_calculation,
                        no_global_recurrence, no_slot2int,      no_int2slot};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ablation_names().size(); ++i) {
    if (flags[i]) out.push_back(ablation_names()[i]);
  }
  return out;
}

bool Ablations::set(const std::string& name) {
  bool* flags[] = {&no_slot_memory,       &no_intent_memory, &no_local_calculation,
                   &no_global_recurrence, &no_slot2int,      &no_int2slot};
  for (std::size_t i = 0; i < ablation_names().size(); ++i) {
    if (ablation_names()[i] == name) {
      *flags[i] = true;
      return true;
    }
  }
  return false;
}

void ModelConfig::validate() const {
  if (hidden_size == 0 || hidden_size % 2 != 0) {
    throw ConfigError("hidden-size must be a positive even number, got " + std::to_string(hidden_size));
  }
  if (blocks == 0) throw ConfigError("blocks must be at least 1");
  if (word_dim == 0 || char_dim == 0 || char_filters == 0) {
    throw ConfigError("embedding dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  const auto& a = ablations;
  // A blocked diffusion into a removed memory's feature has nothing to act on.
  if (a.no_slot_memory && a.no_int2slot) {
    throw ConfigError("contradictory ablations: no-slot-memory with no-int2slot");
  }
  if (a.no_intent_memory && a.no_slot2int) {
    throw ConfigError("contradictory ablations: no-intent-memory with no-slot2int");
  }
}

}  // namespace cmnet::model
