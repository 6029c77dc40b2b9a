#include "cmnet/model/embedding.hpp"

#include "cmnet/errors.hpp"
#include "cmnet/train/init.hpp"

namespace cmnet::model {

EncodedUtterance encode(const data::Vocabulary& vocab, const data::Utterance& utt) {
  EncodedUtterance enc;
  enc.words.reserve(utt.size());
  for (const auto& token : utt.tokens) {
    enc.words.push_back(vocab.token_id(token));
    std::vector<std::size_t> ids;
    for (const auto& ch : data::utf8_chars(token)) ids.push_back(vocab.char_id(ch));
    enc.chars.push_back(std::move(ids));
  }
  for (const auto& tag : utt.slot_tags) {
    auto id = vocab.slot_id(tag);
    if (!id) {
      enc.slots.clear();
      break;
    }
    enc.slots.push_back(*id);
  }
  if (!utt.intents.empty()) enc.intent = vocab.intent_id(utt.intents.front());
  return enc;
}

ad::Var char_cnn(ad::Var char_table, ad::Var filters, ad::Var bias,
                 const std::vector<std::vector<std::size_t>>& chars, std::size_t pad_id) {
  std::vector<std::size_t> window_ids;
  std::vector<std::size_t> segments;
  for (const auto& token : chars) {
    if (token.empty()) throw ContractError("char_cnn: empty token");
    for (std::size_t i = 0; i < token.size(); ++i) {
      window_ids.push_back(i == 0 ? pad_id : token[i - 1]);
      window_ids.push_back(token[i]);
      window_ids.push_back(i + 1 == token.size() ? pad_id : token[i + 1]);
    }
    segments.push_back(token.size());
  }
  const std::size_t width = char_table.cols();
  auto windows = ad::reshape(ad::embedding_lookup(char_table, window_ids), window_ids.size() / 3, 3 * width);
  auto conv = ad::tanh(ad::add(ad::matmul_t(windows, filters), bias));
  return ad::max_over_time(conv, segments);
}

EmbeddingLayer::EmbeddingLayer(ad::ParameterStore& store, const ModelConfig& config,
                               const data::Vocabulary& vocab,
                               const data::PretrainedEmbeddings& pretrained, std::uint64_t seed)
    : vocab_(&vocab) {
  const std::size_t tokens = vocab.tokens().size();
  if (pretrained.matrix.rows() != tokens || pretrained.dim != config.word_dim) {
    throw ConfigError("pretrained embeddings do not match vocabulary size " + std::to_string(tokens) +
                      " and word-dim " + std::to_string(config.word_dim));
  }
  pretrained_ = &store.add("embed.pretrained", pretrained.matrix, false);
  ad::Tensor cov = ad::Tensor::zeros(tokens, 1);
  for (std::size_t i = 0; i < tokens; ++i) cov[i] = pretrained.covered[i] ? 1.0 : 0.0;
  coverage_ = &store.add("embed.coverage", std::move(cov), false);
  unk_ = &train::add_weight(store, "embed.unk", 1, config.word_dim, seed);
  char_table_ = &train::add_weight(store, "embed.char.table", vocab.chars().size(), config.char_dim, seed);
  char_filters_ = &train::add_weight(store, "embed.char.filters", config.char_filters, 3 * config.char_dim, seed);
  char_bias_ = &train::add_bias(store, "embed.char.bias", config.char_filters);
  projection_ = &train::add_weight(store, "embed.proj", config.hidden_size, config.input_dim(), seed);
}

ad::Var EmbeddingLayer::char_cnn_embed(ad::Tape& tape, const std::string& token) const {
  std::vector<std::size_t> ids;
  for (const auto& ch : data::utf8_chars(token)) ids.push_back(vocab_->char_id(ch));
  return char_cnn(tape.parameter(*char_table_), tape.parameter(*char_filters_),
                  tape.parameter(*char_bias_), {ids}, data::Vocabulary::kPad);
}

ad::Var EmbeddingLayer::word_vectors(ad::Tape& tape, const EncodedUtterance& utt) const {
  const std::size_t n = utt.size();
  const std::size_t dim = pretrained_->value.cols();
  ad::Tensor uncovered = ad::Tensor::zeros(n, dim);
  for (std::size_t t = 0; t < n; ++t) {
    const double flag = coverage_->value[utt.words[t]] == 0.0 ? 1.0 : 0.0;
    for (auto& v : uncovered.row_span(t)) v = flag;
  }
  auto pre = ad::embedding_lookup(tape.parameter(*pretrained_), utt.words);
  auto unk = ad::embedding_lookup(tape.parameter(*unk_), std::vector<std::size_t>(n, 0));
  return ad::add(pre, ad::mul(unk, tape.constant(std::move(uncovered))));
}

EmbeddedUtterance EmbeddingLayer::embed(ad::Tape& tape, const EncodedUtterance& utt,
                                        Dropout* dropout) const {
  if (utt.size() == 0) throw ContractError("embed: empty utterance");
  auto chars = char_cnn(tape.parameter(*char_table_), tape.parameter(*char_filters_),
                        tape.parameter(*char_bias_), utt.chars, data::Vocabulary::kPad);
  auto inputs = maybe_dropout(ad::concat({word_vectors(tape, utt), chars}, 1), dropout);
  return {inputs, ad::matmul_t(inputs, tape.parameter(*projection_))};
}

}  // namespace cmnet::model
