#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "cmnet/data/corpus.hpp"
#include "cmnet/eval/metrics.hpp"
#include "cmnet/model/cmnet.hpp"

namespace cmnet::train {

struct TrainConfig {
  double lr = 0.001;
  double clip_norm = 3.0;
  double lambda = 0.5;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  std::size_t batch_size = 1;
  double decay_factor = 0.95;
  // Epochs without validation improvement before stopping; 0 disables.
  std::size_t patience = 0;
  // Stop as soon as the training set is fitted perfectly (slot F1 and
  // intent accuracy both 1). Costs one extra evaluation pass per epoch.
  bool stop_when_fitted = false;

  // Throws ConfigError.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  double valid_slot_f1 = 0.0;
  double valid_intent_accuracy = 0.0;
  double train_slot_f1 = 0.0;         // only with stop_when_fitted
  double train_intent_accuracy = 0.0; // only with stop_when_fitted
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  // Loss of every update step in order; bit-identical across equal runs.
  std::vector<double> step_losses;
  std::size_t best_epoch = 0;
  double best_score = 0.0;
  bool fitted = false;
};

// Predicts every utterance and scores against its gold labels.
eval::EvalReport evaluate(const model::CmNet& model, const data::Corpus& corpus);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Seeded shuffled passes with per-step clipping and Adam. After each epoch
// the model is scored on `valid` (or on `train` when `valid` is empty) and
// the parameters with the best slot F1 + intent accuracy are restored at
// the end. Throws DivergenceError on a non-finite loss.
TrainResult train(model::CmNet& model, const data::Corpus& train, const data::Corpus& valid,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace cmnet::train
