#pragma once

// Shared helpers for the test binaries: random tensors, small corpora and
// brute-force oracles.

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cmnet/autodiff/grad_check.hpp"
#include "cmnet/autodiff/tape.hpp"
#include "cmnet/data/corpus.hpp"
#include "cmnet/data/embeddings.hpp"
#include "cmnet/data/vocabulary.hpp"
#include "cmnet/random.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return CMNET_DATA_DIR; }

inline cmnet::ad::Tensor random_tensor(std::size_t rows, std::size_t cols, cmnet::Rng& rng, double scale = 1.0) {
  auto t = cmnet::ad::Tensor::zeros(rows, cols);
  for (auto& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

// Calls f on every tag sequence of length n over k tags.
inline void for_each_path(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> path(n, 0);
  while (true) {
    f(path);
    std::size_t i = 0;
    while (i < n && ++path[i] == k) path[i++] = 0;
    if (i == n) return;
  }
}

// Path score written out term by term.
inline double brute_score(const cmnet::ad::Tensor& p, const cmnet::ad::Tensor& a, const std::vector<std::size_t>& y) {
  const std::size_t k = p.cols();
  double s = a(k, y.front()) + a(y.back(), k + 1);
  for (std::size_t t = 0; t < y.size(); ++t) s += p(t, y[t]);
  for (std::size_t t = 0; t + 1 < y.size(); ++t) s += a(y[t], y[t + 1]);
  return s;
}

inline double brute_log_partition(const cmnet::ad::Tensor& p, const cmnet::ad::Tensor& a) {
  std::vector<double> scores;
  for_each_path(p.rows(), p.cols(), [&](const std::vector<std::size_t>& y) { scores.push_back(brute_score(p, a, y)); });
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : scores) hi = std::max(hi, s);
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - hi);
  return hi + std::log(sum);
}

// A small labelled corpus in BIOES.
inline cmnet::data::Corpus tiny_corpus() {
  using cmnet::data::Utterance;
  return {
      Utterance{{"play", "roy", "orbison"}, {"O", "B-artist", "E-artist"}, {"PlayMusic"}},
      Utterance{{"book", "a", "french", "table"}, {"O", "O", "S-cuisine", "O"}, {"BookRestaurant"}},
      Utterance{{"add", "jazz", "to", "chill"}, {"O", "S-genre", "O", "S-playlist"}, {"AddToPlaylist", "PlayMusic"}},
  };
}

inline cmnet::data::PretrainedEmbeddings random_embeddings(const cmnet::data::Vocabulary& vocab, std::size_t dim,
                                                           std::uint64_t seed) {
  cmnet::Rng rng(seed);
  cmnet::data::PretrainedEmbeddings e;
  e.dim = dim;
  e.matrix = random_tensor(vocab.tokens().size(), dim, rng, 0.5);
  e.covered.assign(vocab.tokens().size(), true);
  e.covered[cmnet::data::Vocabulary::kPad] = e.covered[cmnet::data::Vocabulary::kUnk] = false;
  for (std::size_t c = 0; c < dim; ++c) {
    e.matrix(0, c) = 0.0;
    e.matrix(1, c) = 0.0;
  }
  return e;
}

}  // namespace testing
