#include "cmnet/data/stats.hpp"

#include <set>
#include <string>

namespace cmnet::data {

CorpusStats corpus_stats(const std::vector<Corpus>& splits) {
  CorpusStats stats;
  if (splits.empty()) return stats;
  std::set<std::string> tokens, intents, slots;
  for (const auto& utt : splits.front()) {
    tokens.insert(utt.tokens.begin(), utt.tokens.end());
    slots.insert(utt.slot_tags.begin(), utt.slot_tags.end());
    intents.insert(utt.intents.begin(), utt.intents.end());
  }
  std::size_t total_tokens = 0, total_utts = 0;
  for (const auto& split : splits) {
    stats.split_sizes.push_back(split.size());
    total_utts += split.size();
    for (const auto& utt : split) total_tokens += utt.size();
  }
  stats.vocab_size = tokens.size();
  stats.intent_count = intents.size();
  stats.slot_count = slots.size();
  stats.average_length =
      total_utts ? static_cast<double>(total_tokens) / static_cast<double>(total_utts) : 0.0;
  return stats;
}

}  // namespace cmnet::data
