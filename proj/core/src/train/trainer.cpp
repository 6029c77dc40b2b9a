#include "cmnet/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "cmnet/errors.hpp"
#include "cmnet/model/inference.hpp"
#include "cmnet/random.hpp"
#include "cmnet/train/optimizer.hpp"

namespace cmnet::train {

namespace {

std::map<std::string, ad::Tensor> snapshot(const ad::ParameterStore& params) {
  std::map<std::string, ad::Tensor> out;
  for (const auto& [name, p] : params) {
    if (p.trainable) out.emplace(name, p.value);
  }
  return out;
}

void restore(ad::ParameterStore& params, const std::map<std::string, ad::Tensor>& values) {
  for (const auto& [name, v] : values) params.get(name).value = v;
}

void accumulate(ad::Gradients& into, const ad::Gradients& grads) {
  if (into.empty()) {
    into = grads;
    return;
  }
  for (const auto& [name, g] : grads) {
    auto dst = into.at(name).data();
    auto src = g.data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip-norm must be positive");
  model::check_lambda(lambda);
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch-size must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ConfigError("decay-factor must lie in (0, 1]");
}

eval::EvalReport evaluate(const model::CmNet& model, const data::Corpus& corpus) {
  std::vector<std::vector<std::string>> gold_tags, pred_tags, gold_intents;
  std::vector<std::string> pred_intents;
  for (const auto& utt : corpus) {
    auto p = model.predict(utt);
    gold_tags.push_back(utt.slot_tags);
    gold_intents.push_back(utt.intents);
    pred_tags.push_back(std::move(p.slot_tags));
    pred_intents.push_back(std::move(p.intent));
  }
  return eval::evaluate(gold_tags, pred_tags, gold_intents, pred_intents);
}

TrainResult train(model::CmNet& model, const data::Corpus& train, const data::Corpus& valid,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw ConfigError("training corpus is empty");

  std::vector<model::EncodedUtterance> encoded;
  encoded.reserve(train.size());
  for (const auto& utt : train) encoded.push_back(model.encode(utt));

  auto& params = model.params();
  AdamState adam(params);
  Rng order_rng = Rng::for_name(config.seed, "train.shuffle");
  Rng dropout_rng = Rng::for_name(config.seed, "train.dropout");
  model::Dropout dropout(model.config().dropout, dropout_rng);
  const data::Corpus& selection = valid.empty() ? train : valid;

  TrainResult result;
  std::map<std::string, ad::Tensor> best;
  bool have_best = false;
  std::size_t stale = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng.engine());
    const double lr = lr_schedule(config.lr, config.decay_factor, epoch);
    double loss_sum = 0.0;
    ad::Gradients batch;
    std::size_t in_batch = 0;
    double batch_loss = 0.0;

    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t u = order[k];
      ad::Tape tape;
      auto loss = model.loss(tape, encoded[u], config.lambda, &dropout);
      const double value = loss.total.value().item();
      if (!std::isfinite(value)) {
        throw DivergenceError("loss is " + std::to_string(value) + " at epoch " + std::to_string(epoch + 1) +
                              ", utterance " + std::to_string(u + 1));
      }
      accumulate(batch, tape.backward(loss.total, params));
      loss_sum += value;
      batch_loss += value;
      ++in_batch;

      if (in_batch == config.batch_size || k + 1 == order.size()) {
        if (in_batch > 1) {
          const double inv = 1.0 / static_cast<double>(in_batch);
          for (auto& [name, g] : batch) {
            for (double& v : g.data()) v *= inv;
          }
        }
        clip_global_norm(batch, config.clip_norm);
        adam.apply(params, batch, lr);
        result.step_losses.push_back(batch_loss / static_cast<double>(in_batch));
        batch.clear();
        in_batch = 0;
        batch_loss = 0.0;
      }
    }

    EpochRecord record;
    record.epoch = epoch + 1;
    record.lr = lr;
    record.mean_loss = loss_sum / static_cast<double>(train.size());
    const auto report = evaluate(model, selection);
    record.valid_slot_f1 = report.slots().f1;
    record.valid_intent_accuracy = report.intent_accuracy();
    if (config.stop_when_fitted) {
      const auto fit = &selection == &train ? report : evaluate(model, train);
      record.train_slot_f1 = fit.slots().f1;
      record.train_intent_accuracy = fit.intent_accuracy();
      result.fitted = record.train_slot_f1 == 1.0 && record.train_intent_accuracy == 1.0;
    }
    result.epochs.push_back(record);
    if (on_epoch) on_epoch(record);

    const double score = record.valid_slot_f1 + record.valid_intent_accuracy;
    if (!have_best || score > result.best_score) {
      have_best = true;
      result.best_score = score;
      result.best_epoch = record.epoch;
      best = snapshot(params);
      stale = 0;
    } else {
      ++stale;
    }
    if (result.fitted) {
      result.best_epoch = record.epoch;
      result.best_score = score;
      break;
    }
    if (config.patience && stale >= config.patience) break;
  }
  // With stop_when_fitted the fitted parameters are kept as they are.
  if (!result.fitted) restore(params, best);
  return result;
}

}  // namespace cmnet::train
