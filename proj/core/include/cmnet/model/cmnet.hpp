#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmnet/autodiff/tape.hpp"
#include "cmnet/data/corpus.hpp"
#include "cmnet/data/embeddings.hpp"
#include "cmnet/data/vocabulary.hpp"
#include "cmnet/model/cm_block.hpp"
#include "cmnet/model/config.hpp"
#include "cmnet/model/dropout.hpp"
#include "cmnet/model/embedding.hpp"
#include "cmnet/model/memory_attention.hpp"

namespace cmnet::model {

struct ManifestEntry {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  bool trainable;
};

// The full network: embeddings, memories, stacked CM-blocks, CRF slot head
// and mean-pooled intent head. Owns its vocabulary and parameters.
class CmNet {
 public:
  CmNet(const ModelConfig& config, data::Vocabulary vocab, const data::PretrainedEmbeddings& pretrained,
        std::uint64_t seed);
  CmNet(const CmNet&) = delete;
  CmNet& operator=(const CmNet&) = delete;
  CmNet(CmNet&&) noexcept = default;
  CmNet& operator=(CmNet&&) noexcept = default;

  struct Forward {
    ad::Var emissions;      // N x slot tags
    ad::Var transitions;    // (tags + 2) x (tags + 2)
    ad::Var intent_logits;  // 1 x intents
    std::vector<CmBlock::Trace> traces;
  };
  Forward forward(ad::Tape& tape, const EncodedUtterance& utt, Dropout* dropout = nullptr,
                  bool keep_traces = false) const;

  struct Loss {
    ad::Var total;
    ad::Var slot;
    ad::Var intent;
  };
  // Throws ContractError when the utterance lacks known gold labels.
  Loss loss(ad::Tape& tape, const EncodedUtterance& utt, double lambda, Dropout* dropout = nullptr) const;

  struct Prediction {
    std::vector<std::string> slot_tags;
    std::string intent;
  };
  Prediction predict(const data::Utterance& utt) const;

  EncodedUtterance encode(const data::Utterance& utt) const { return model::encode(*vocab_, utt); }

  const ModelConfig& config() const noexcept { return config_; }
  const data::Vocabulary& vocab() const noexcept { return *vocab_; }
  ad::ParameterStore& params() noexcept { return *store_; }
  const ad::ParameterStore& params() const noexcept { return *store_; }
  std::vector<ManifestEntry> manifest() const;

 private:
  ad::Var emission_weight(ad::Tape& tape) const;
  ad::Var intent_weight(ad::Tape& tape) const;

  ModelConfig config_;
  std::unique_ptr<data::Vocabulary> vocab_;
  std::unique_ptr<ad::ParameterStore> store_;
  std::unique_ptr<EmbeddingLayer> embedding_;
  std::optional<MemoryBank> slot_memory_;
  std::optional<MemoryBank> intent_memory_;
  std::vector<CmBlock> blocks_;
  const ad::Parameter* transitions_ = nullptr;
  const ad::Parameter* emission_hidden_ = nullptr;
  const ad::Parameter* emission_slot_ = nullptr;  // untied only
  const ad::Parameter* emission_bias_ = nullptr;
  const ad::Parameter* intent_hidden_ = nullptr;
  const ad::Parameter* intent_feature_ = nullptr;  // untied only
  const ad::Parameter* intent_bias_ = nullptr;
};

}  // namespace cmnet::model
