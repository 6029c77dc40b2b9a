#include <cmath>

#include "cmnet/errors.hpp"
#include "cmnet/model/embedding.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cmnet;
using ad::Tensor;
using ad::Var;

namespace {

data::Corpus case_corpus() {
  return {data::Utterance{{"ab", "Ab", "b"}, {"O", "O", "S-x"}, {"A"}}};
}

model::ModelConfig small_config() {
  model::ModelConfig c;
  c.word_dim = 4;
  c.char_dim = 3;
  c.char_filters = 2;
  c.hidden_size = 6;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST_SUITE("char_cnn") {
  TEST_CASE("zero filters give zero features") {
    ad::Tape tape;
    Rng rng(1);
    auto table = tape.constant(testing::random_tensor(5, 3, rng));
    auto out = model::char_cnn(table, tape.constant(Tensor::zeros(4, 9)), tape.constant(Tensor::zeros(1, 4)),
                               {{2, 3, 4}, {3}}, 0);
    REQUIRE(out.rows() == 2);
    for (double v : out.value().data()) CHECK(v == 0.0);
  }

  TEST_CASE("single character uses one padded window") {
    ad::Tape tape;
    auto table = tape.constant(Tensor::matrix({{0.3}, {0.0}, {-0.8}}));
    auto filters = tape.constant(Tensor::matrix({{0.5, 2.0, -1.0}, {1.0, 1.0, 1.0}}));
    auto bias = tape.constant(Tensor::row({0.1, -0.2}));
    auto out = model::char_cnn(table, filters, bias, {{2}}, 0);
    CHECK(out.value()(0, 0) == doctest::Approx(std::tanh(0.15 - 1.6 - 0.3 + 0.1)).epsilon(1e-15));
    CHECK(out.value()(0, 1) == doctest::Approx(std::tanh(0.3 - 0.8 + 0.3 - 0.2)).epsilon(1e-15));
  }

  TEST_CASE("two characters, one filter, by hand") {
    // ids: 0 = pad (0.3), 2 = 'a' (1.0), 3 = 'b' (2.0)
    ad::Tape tape;
    auto table = tape.constant(Tensor::matrix({{0.3}, {0.0}, {1.0}, {2.0}}));
    auto filters = tape.constant(Tensor::matrix({{0.5, -1.0, 0.25}}));
    auto bias = tape.constant(Tensor::row({0.1}));
    auto out = model::char_cnn(table, filters, bias, {{2, 3}}, 0);
    // windows [pad a b] -> -0.25 and [a b pad] -> -1.325
    CHECK(out.value()(0, 0) == doctest::Approx(std::tanh(-0.25)).epsilon(1e-15));
  }

  TEST_CASE("empty token is rejected") {
    ad::Tape tape;
    auto t = tape.constant(Tensor::zeros(2, 1));
    CHECK_THROWS_AS(model::char_cnn(t, tape.constant(Tensor::zeros(1, 3)), tape.constant(Tensor::zeros(1, 1)),
                                    {{}}, 0),
                    ContractError);
  }
}

TEST_SUITE("embedding layer") {
  TEST_CASE("identity projection reproduces the inputs") {
    auto corpus = case_corpus();
    auto vocab = data::Vocabulary::build(corpus);
    auto config = small_config();
    ad::ParameterStore store;
    model::EmbeddingLayer layer(store, config, vocab, testing::random_embeddings(vocab, 4, 3), 11);
    auto& proj = store.get("embed.proj").value;
    proj.fill(0.0);
    for (std::size_t i = 0; i < 6; ++i) proj(i, i) = 1.0;
    ad::Tape tape(false);
    auto out = layer.embed(tape, model::encode(vocab, corpus[0]), nullptr);
    CHECK(out.hidden.value() == out.inputs.value());
  }

  TEST_CASE("rate 0 dropout matches evaluation") {
    auto corpus = case_corpus();
    auto vocab = data::Vocabulary::build(corpus);
    ad::ParameterStore store;
    model::EmbeddingLayer layer(store, small_config(), vocab, testing::random_embeddings(vocab, 4, 3), 11);
    auto enc = model::encode(vocab, corpus[0]);
    Rng rng(5);
    model::Dropout none(0.0, rng);
    ad::Tape a(false), b(false);
    CHECK(layer.embed(a, enc, &none).inputs.value() == layer.embed(b, enc, nullptr).inputs.value());
  }

  TEST_CASE("inverted dropout keeps the mean") {
    Rng rng(99);
    model::Dropout dropout(0.5, rng);
    const Tensor x = Tensor::matrix({{1.0, -2.0, 0.5}});
    const int draws = 10000;
    std::vector<double> mean(3, 0.0);
    for (int k = 0; k < draws; ++k) {
      ad::Tape tape(false);
      const auto& y = dropout.apply(tape.constant(x)).value();
      for (std::size_t i = 0; i < 3; ++i) mean[i] += y[i] / draws;
    }
    // each entry is x or 2x/0 with equal odds: stddev |x|, so 3σ of the mean is 3|x|/100
    for (std::size_t i = 0; i < 3; ++i) {
      CAPTURE(i);
      CHECK(std::abs(mean[i] - x[i]) <= 3.0 * std::abs(x[i]) / std::sqrt(double(draws)));
    }
  }

  TEST_CASE("uncovered tokens read the UNK row") {
    auto corpus = case_corpus();
    auto vocab = data::Vocabulary::build(corpus);
    auto pre = testing::random_embeddings(vocab, 4, 3);
    const auto b = vocab.token_id("b");
    pre.covered[b] = false;
    for (std::size_t c = 0; c < 4; ++c) pre.matrix(b, c) = 0.0;
    ad::ParameterStore store;
    model::EmbeddingLayer layer(store, small_config(), vocab, pre, 11);
    ad::Tape tape(false);
    auto words = layer.word_vectors(tape, model::encode(vocab, corpus[0])).value();
    const auto& unk = store.get("embed.unk").value;
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(words(2, c) == unk[c]);
      CHECK(words(0, c) == pre.matrix(vocab.token_id("ab"), c));
    }
  }

  TEST_CASE("pretrained matrix is frozen") {
    auto corpus = case_corpus();
    auto vocab = data::Vocabulary::build(corpus);
    ad::ParameterStore store;
    model::EmbeddingLayer layer(store, small_config(), vocab, testing::random_embeddings(vocab, 4, 3), 11);
    CHECK_FALSE(store.get("embed.pretrained").trainable);
    ad::Tape tape;
    auto out = layer.embed(tape, model::encode(vocab, corpus[0]), nullptr);
    auto grads = tape.backward(ad::sum(out.hidden), store);
    CHECK(grads.count("embed.pretrained") == 0);
    CHECK(grads.count("embed.char.table") == 1);
  }

  TEST_CASE("character features are case sensitive and deterministic") {
    auto corpus = case_corpus();
    auto vocab = data::Vocabulary::build(corpus);
    ad::ParameterStore store;
    model::EmbeddingLayer layer(store, small_config(), vocab, testing::random_embeddings(vocab, 4, 3), 11);
    ad::Tape tape(false);
    auto lower = layer.char_cnn_embed(tape, "ab").value();
    auto upper = layer.char_cnn_embed(tape, "Ab").value();
    CHECK(lower != upper);
    CHECK(layer.char_cnn_embed(tape, "ab").value() == lower);
  }

  TEST_CASE("mismatched pretrained matrix") {
    auto corpus = case_corpus();
    auto vocab = data::Vocabulary::build(corpus);
    ad::ParameterStore store;
    auto config = small_config();
    config.word_dim = 5;
    CHECK_THROWS_AS(model::EmbeddingLayer(store, config, vocab, testing::random_embeddings(vocab, 4, 3), 11),
                    ConfigError);
  }
}
