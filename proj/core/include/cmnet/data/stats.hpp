#pragma once

#include <cstddef>
#include <vector>

#include "cmnet/data/corpus.hpp"

namespace cmnet::data {

// Counts in the style of a dataset-statistics table. Inventories (vocab,
// intents, slot tags incl. "O") come from the first split, which is taken
// to be the training split; the average length runs over every split.
struct CorpusStats {
  std::size_t vocab_size = 0;
  double average_length = 0.0;
  std::size_t intent_count = 0;
  std::size_t slot_count = 0;
  std::vector<std::size_t> split_sizes;
};

CorpusStats corpus_stats(const std::vector<Corpus>& splits);

}  // namespace cmnet::data
