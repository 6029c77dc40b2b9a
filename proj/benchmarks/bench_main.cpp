#include <benchmark/benchmark.h>

#include "cmnet/data/vocabulary.hpp"
#include "cmnet/model/cmnet.hpp"
#include "cmnet/model/crf.hpp"
#include "cmnet/random.hpp"

using namespace cmnet;
using ad::Tensor;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng) {
  auto t = Tensor::zeros(rows, cols);
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Synthetic utterance of n tokens over a small vocabulary.
data::Corpus synthetic_corpus(std::size_t n) {
  const char* words[] = {"play", "some", "jazz", "by", "miles", "davis", "in", "the", "kitchen", "now"};
  const char* tags[] = {"O", "O", "S-genre", "O", "B-artist", "E-artist", "O", "O", "S-room", "O"};
  data::Utterance u;
  for (std::size_t t = 0; t < n; ++t) {
    u.tokens.emplace_back(words[t % 10]);
    u.slot_tags.emplace_back(tags[t % 10]);
  }
  u.intents = {"PlayMusic"};
  return {u};
}

struct Fixture {
  data::Corpus corpus;
  model::CmNet net;

  Fixture(std::size_t n, std::size_t hidden)
      : corpus(synthetic_corpus(n)), net(make_net(corpus, hidden)) {}

  static model::CmNet make_net(const data::Corpus& corpus, std::size_t hidden) {
    auto vocab = data::Vocabulary::build(corpus);
    model::ModelConfig c;
    c.hidden_size = hidden;
    c.blocks = 3;
    c.word_dim = 50;
    c.char_dim = 16;
    c.char_filters = 30;
    c.dropout = 0.0;
    data::PretrainedEmbeddings pre;
    pre.dim = c.word_dim;
    pre.matrix = Tensor::zeros(vocab.tokens().size(), c.word_dim);
    pre.covered.assign(vocab.tokens().size(), false);
    return model::CmNet(c, std::move(vocab), pre, 1);
  }
};

void BM_Forward(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), 64);
  const auto enc = f.net.encode(f.corpus.front());
  for (auto _ : state) {
    ad::Tape tape(false);
    benchmark::DoNotOptimize(f.net.forward(tape, enc).emissions.value().data().data());
  }
}
BENCHMARK(BM_Forward)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)), 64);
  const auto enc = f.net.encode(f.corpus.front());
  for (auto _ : state) {
    ad::Tape tape;
    auto grads = tape.backward(f.net.loss(tape, enc, 0.5).total, f.net.params());
    benchmark::DoNotOptimize(grads.size());
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_CrfLogPartition(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 72;
  const auto p = random_tensor(n, k, rng), a = random_tensor(k + 2, k + 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model::crf_log_partition(p, a));
}
BENCHMARK(BM_CrfLogPartition)->Arg(10)->Arg(40);

void BM_Viterbi(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 72;
  const auto p = random_tensor(n, k, rng), a = random_tensor(k + 2, k + 2, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model::viterbi_decode(p, a).score);
}
BENCHMARK(BM_Viterbi)->Arg(10)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
