#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmnet/autodiff/tape.hpp"
#include "cmnet/data/corpus.hpp"
#include "cmnet/data/embeddings.hpp"
#include "cmnet/data/vocabulary.hpp"
#include "cmnet/model/config.hpp"
#include "cmnet/model/dropout.hpp"

namespace cmnet::model {

// Utterance mapped to vocabulary ids.
struct EncodedUtterance {
  std::vector<std::size_t> words;
  std::vector<std::vector<std::size_t>> chars;
  // Gold labels; empty / nullopt when the utterance carries labels outside
  // the training inventories.
  std::vector<std::size_t> slots;
  std::optional<std::size_t> intent;

  std::size_t size() const noexcept { return words.size(); }
};

EncodedUtterance encode(const data::Vocabulary& vocab, const data::Utterance& utt);

// Width-3 character convolution with tanh and max pooling. Each token is
// framed by one PAD character on either side, so a token of L characters
// yields L windows. Returns one row of `filters.rows()` features per token.
ad::Var char_cnn(ad::Var char_table, ad::Var filters, ad::Var bias,
                 const std::vector<std::vector<std::size_t>>& chars, std::size_t pad_id);

struct EmbeddedUtterance {
  ad::Var inputs;  // N x (word_dim + char_filters), after dropout
  ad::Var hidden;  // N x hidden_size, initial block states
};

// Frozen pretrained word vectors (with a learnable UNK row for uncovered
// tokens) concatenated with character-CNN features, then projected to the
// hidden size to seed the first block.
class EmbeddingLayer {
 public:
  EmbeddingLayer(ad::ParameterStore& store, const ModelConfig& config, const data::Vocabulary& vocab,
                 const data::PretrainedEmbeddings& pretrained, std::uint64_t seed);

  ad::Var char_cnn_embed(ad::Tape& tape, const std::string& token) const;
  ad::Var word_vectors(ad::Tape& tape, const EncodedUtterance& utt) const;
  EmbeddedUtterance embed(ad::Tape& tape, const EncodedUtterance& utt, Dropout* dropout) const;

 private:
  const data::Vocabulary* vocab_;
  const ad::Parameter* pretrained_;
  const ad::Parameter* coverage_;
  const ad::Parameter* unk_;
  const ad::Parameter* char_table_;
  const ad::Parameter* char_filters_;
  const ad::Parameter* char_bias_;
  const ad::Parameter* projection_;
};

}  // namespace cmnet::model
