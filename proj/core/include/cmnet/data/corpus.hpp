#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmnet/data/tagging.hpp"

namespace cmnet::data {

struct Utterance {
  std::vector<std::string> tokens;
  std::vector<std::string> slot_tags;
  // Non-empty. Training uses the first label; evaluation accepts any.
  std::vector<std::string> intents;

  std::size_t size() const noexcept { return tokens.size(); }
  friend bool operator==(const Utterance&, const Utterance&) = default;
};

using Corpus = std::vector<Utterance>;

// Records are N lines "token<TAB>tag" followed by "#intent<TAB>a[#b...]",
// separated by a blank line. Throws ParseError with the offending line.
Corpus parse_corpus(std::istream& in, TagScheme scheme);
Corpus read_corpus_file(const std::filesystem::path& path, TagScheme scheme);

void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus);

}  // namespace cmnet::data
