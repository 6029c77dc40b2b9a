#include <cmath>

#include "cmnet/errors.hpp"
#include "cmnet/model/cmnet.hpp"
#include "cmnet/model/crf.hpp"
#include "cmnet/model/inference.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cmnet;
using ad::Tensor;
using ad::Var;
using doctest::Approx;

namespace {

model::ModelConfig tiny_model(bool tie = true) {
  model::ModelConfig c;
  c.hidden_size = 4;
  c.blocks = 1;
  c.word_dim = 3;
  c.char_dim = 2;
  c.char_filters = 2;
  c.dropout = 0.0;
  c.tie_memories = tie;
  return c;
}

model::CmNet tiny_net(bool tie = true, std::uint64_t seed = 3) {
  auto vocab = data::Vocabulary::build(testing::tiny_corpus());
  auto pre = testing::random_embeddings(vocab, 3, 1);
  return model::CmNet(tiny_model(tie), std::move(vocab), pre, seed);
}

}  // namespace

TEST_SUITE("heads") {
  TEST_CASE("zero emission weights leave the bias") {
    ad::Tape tape;
    Rng rng(1);
    auto p = model::emission_scores(tape.constant(testing::random_tensor(3, 2, rng)),
                                    tape.constant(testing::random_tensor(3, 2, rng)),
                                    tape.constant(Tensor::zeros(4, 2)), tape.constant(Tensor::zeros(4, 2)),
                                    tape.constant(Tensor::row({1, 2, 3, 4})));
    for (std::size_t t = 0; t < 3; ++t) CHECK(p.value()(t, 2) == 3.0);
  }

  TEST_CASE("two tags by hand") {
    ad::Tape tape;
    // h = [1, 2], h_slot = [-1, 0.5]
    auto p = model::emission_scores(tape.constant(Tensor::row({1, 2})), tape.constant(Tensor::row({-1, 0.5})),
                                    tape.constant(Tensor::matrix({{0.5, -1}, {2, 0}})),
                                    tape.constant(Tensor::matrix({{1, 1}, {0, 4}})),
                                    tape.constant(Tensor::row({0.1, -0.2})));
    CHECK(p.value()[0] == Approx(0.5 - 2 - 1 + 0.5 + 0.1).epsilon(1e-15));
    CHECK(p.value()[1] == Approx(2 + 2 - 0.2).epsilon(1e-15));
  }

  TEST_CASE("three intents by hand") {
    ad::Tape tape;
    // mean h = [2, 0], mean h_int = [1, -1]
    auto logits = model::intent_logits(
        tape.constant(Tensor::matrix({{1, 1}, {3, -1}})), tape.constant(Tensor::matrix({{0, -2}, {2, 0}})),
        tape.constant(Tensor::matrix({{1, 0}, {0, 1}, {1, 1}})),
        tape.constant(Tensor::matrix({{0, 1}, {2, 0}, {-1, -1}})), tape.constant(Tensor::row({0, 0.5, -0.5})));
    REQUIRE(logits.cols() == 3);
    CHECK(logits.value()[0] == Approx(2 - 1).epsilon(1e-15));
    CHECK(logits.value()[1] == Approx(0 + 2 + 0.5).epsilon(1e-15));
    CHECK(logits.value()[2] == Approx(2 + 0 - 0.5).epsilon(1e-15));
  }

  TEST_CASE("pooling ignores token order") {
    Rng rng(2);
    auto h = testing::random_tensor(4, 2, rng), hi = testing::random_tensor(4, 2, rng);
    auto u1 = testing::random_tensor(3, 2, rng), u2 = testing::random_tensor(3, 2, rng);
    Tensor hp = Tensor::zeros(4, 2), hip = Tensor::zeros(4, 2);
    const std::size_t order[] = {2, 0, 3, 1};
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t j = 0; j < 2; ++j) {
        hp(t, j) = h(order[t], j);
        hip(t, j) = hi(order[t], j);
      }
    ad::Tape tape;
    auto bias = tape.constant(Tensor::zeros(1, 3));
    auto a = model::intent_logits(tape.constant(h), tape.constant(hi), tape.constant(u1), tape.constant(u2), bias);
    auto b = model::intent_logits(tape.constant(hp), tape.constant(hip), tape.constant(u1), tape.constant(u2), bias);
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.value()[k] == Approx(b.value()[k]).epsilon(1e-14));
  }

  TEST_CASE("cross entropy and shift invariance") {
    ad::Tape tape;
    const Tensor logits = Tensor::row({1.0, 3.0, -2.0});
    const double lse = std::log(std::exp(1.0) + std::exp(3.0) + std::exp(-2.0));
    CHECK(model::intent_cross_entropy(tape.constant(logits), 0).value().item() == Approx(lse - 1.0).epsilon(1e-15));
    auto shifted = logits;
    for (auto& v : shifted.data()) v += 7.5;
    CHECK(model::argmax(shifted) == model::argmax(logits));
    CHECK(model::intent_cross_entropy(tape.constant(shifted), 0).value().item() ==
          Approx(lse - 1.0).epsilon(1e-13));
    CHECK(model::argmax(Tensor::row({2.0, 5.0, 5.0})) == 1);
  }
}

TEST_SUITE("joint loss") {
  TEST_CASE("weighting") {
    ad::Tape tape;
    auto s = tape.constant(Tensor::scalar(2.0)), i = tape.constant(Tensor::scalar(6.0));
    CHECK(model::joint_loss(s, i, 0.5).value().item() == 4.0);
    CHECK(model::joint_loss(s, i, 0.0).value().item() == 2.0);
    CHECK(model::joint_loss(s, i, 1.0).value().item() == 6.0);
    CHECK(model::joint_loss(s, i, 0.25).value().item() == Approx(3.0).epsilon(1e-15));
  }

  TEST_CASE("lambda outside [0, 1] is a config error") {
    ad::Tape tape;
    auto s = tape.constant(Tensor::scalar(2.0));
    CHECK_THROWS_AS(model::joint_loss(s, s, -0.01), ConfigError);
    CHECK_THROWS_AS(model::joint_loss(s, s, 1.5), ConfigError);
    CHECK_THROWS_AS(model::check_lambda(std::nan("")), ConfigError);
  }

  TEST_CASE("lambda 1 leaves the CRF untouched and lambda 0 the intent head") {
    auto net = tiny_net();
    const auto enc = net.encode(testing::tiny_corpus()[0]);
    auto grads_at = [&](double lambda) {
      ad::Tape tape;
      return tape.backward(net.loss(tape, enc, lambda).total, net.params());
    };
    auto pure_intent = grads_at(1.0);
    for (const char* name : {"crf.transitions", "crf.emission.W", "crf.emission.b"}) {
      CAPTURE(name);
      for (double v : pure_intent.at(name).data()) CHECK(v == 0.0);
    }
    auto pure_slot = grads_at(0.0);
    for (const char* name : {"intent.W", "intent.b"}) {
      CAPTURE(name);
      for (double v : pure_slot.at(name).data()) CHECK(v == 0.0);
    }
    double norm = 0.0;
    for (double v : pure_slot.at("crf.transitions").data()) norm += v * v;
    CHECK(norm > 0.0);
  }

  TEST_CASE("loss parts") {
    auto net = tiny_net();
    const auto enc = net.encode(testing::tiny_corpus()[1]);
    ad::Tape tape;
    auto loss = net.loss(tape, enc, 0.3);
    CHECK(loss.total.value().item() ==
          Approx(0.7 * loss.slot.value().item() + 0.3 * loss.intent.value().item()).epsilon(1e-15));
    CHECK(loss.slot.value().item() > 0.0);
    CHECK(loss.intent.value().item() > 0.0);
  }

  TEST_CASE("unknown gold labels are refused") {
    auto net = tiny_net();
    data::Utterance odd{{"play"}, {"S-unseen"}, {"PlayMusic"}};
    ad::Tape tape;
    CHECK_THROWS_AS(net.loss(tape, net.encode(odd), 0.5), ContractError);
  }
}

TEST_SUITE("memory tying") {
  TEST_CASE("tying removes the feature halves") {
    auto tied = tiny_net(true);
    auto untied = tiny_net(false);
    const std::size_t slots = tied.vocab().slots().size(), intents = tied.vocab().intents().size();
    CHECK(untied.params().trainable_count() - tied.params().trainable_count() == (slots + intents) * 4);
    CHECK_FALSE(tied.params().contains("crf.emission.slot"));
    CHECK(untied.params().contains("crf.emission.slot"));
  }

  TEST_CASE("memory cells drive the tied emissions") {
    auto net = tiny_net(true);
    const auto enc = net.encode(testing::tiny_corpus()[0]);
    auto emissions = [&] {
      ad::Tape tape(false);
      return net.forward(tape, enc).emissions.value();
    };
    auto before = emissions();
    net.params().get("memory.slot").value(0, 0) += 0.5;
    CHECK(emissions() != before);
  }

  TEST_CASE("tied gradient sums both uses") {
    // Untied run with the feature half copied from the memory: the tied memory
    // gradient must equal memory gradient + feature-half gradient.
    auto tied = tiny_net(true);
    auto untied = tiny_net(false);
    for (auto& [name, p] : tied.params()) {
      if (untied.params().contains(name)) untied.params().get(name).value = p.value;
    }
    untied.params().get("crf.emission.slot").value = tied.params().get("memory.slot").value;
    untied.params().get("intent.feature").value = tied.params().get("memory.intent").value;
    const auto enc = tied.encode(testing::tiny_corpus()[2]);
    ad::Tape t1, t2;
    auto g_tied = t1.backward(tied.loss(t1, enc, 0.5).total, tied.params());
    auto g_untied = t2.backward(untied.loss(t2, enc, 0.5).total, untied.params());
    const auto& mt = g_tied.at("memory.slot");
    const auto& mu = g_untied.at("memory.slot");
    const auto& fu = g_untied.at("crf.emission.slot");
    for (std::size_t k = 0; k < mt.size(); ++k) CHECK(mt[k] == Approx(mu[k] + fu[k]).epsilon(1e-12));
    const auto& it = g_tied.at("memory.intent");
    const auto& iu = g_untied.at("memory.intent");
    const auto& ifu = g_untied.at("intent.feature");
    for (std::size_t k = 0; k < it.size(); ++k) CHECK(it[k] == Approx(iu[k] + ifu[k]).epsilon(1e-12));
  }
}

TEST_SUITE("prediction") {
  TEST_CASE("prediction uses the inventories and matches viterbi") {
    auto net = tiny_net();
    const auto utt = testing::tiny_corpus()[1];
    auto pred = net.predict(utt);
    REQUIRE(pred.slot_tags.size() == utt.size());
    ad::Tape tape(false);
    auto f = net.forward(tape, net.encode(utt));
    auto best = model::viterbi_decode(f.emissions.value(), f.transitions.value());
    for (std::size_t t = 0; t < utt.size(); ++t) CHECK(pred.slot_tags[t] == net.vocab().slots().at(best.tags[t]));
    CHECK(pred.intent == net.vocab().intents().at(model::argmax(f.intent_logits.value())));
  }

  TEST_CASE("same seed, same network") {
    auto a = tiny_net(true, 5), b = tiny_net(true, 5), c = tiny_net(true, 6);
    CHECK(a.params().get("block.0.gate.i.W1").value == b.params().get("block.0.gate.i.W1").value);
    CHECK(a.params().get("block.0.gate.i.W1").value != c.params().get("block.0.gate.i.W1").value);
  }
}
