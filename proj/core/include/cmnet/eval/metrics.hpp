#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cmnet/data/tagging.hpp"

namespace cmnet::eval {

// Labeled chunk over tokens [start, end], both inclusive.
struct Span {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;

  friend auto operator<=>(const Span&, const Span&) = default;
};

// conlleval chunking. BIOES tags are first mapped tag by tag (S -> B,
// E -> I); then a chunk starts at B, at an I with no open chunk of its
// type, or at any type change, and ends before O, B or a type change.
// Ill-formed sequences are repaired this way, never rejected. Tags that
// are not parseable count as O.
std::vector<Span> extract_spans(const std::vector<std::string>& tags);

// Writes spans back as a valid tag sequence of length n.
std::vector<std::string> spans_to_tags(const std::vector<Span>& spans, std::size_t n, data::TagScheme scheme);

// Tags re-encoded through their spans: always valid under `scheme`.
std::vector<std::string> repair_tags(const std::vector<std::string>& tags, data::TagScheme scheme);

struct SpanCounts {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators give zero.
Prf prf(const SpanCounts& counts);

// Exact-span matching per utterance, totals over the corpus. Throws
// ContractError when the corpora or any utterance pair differ in length.
SpanCounts span_counts(const std::vector<std::vector<std::string>>& gold,
                       const std::vector<std::vector<std::string>>& predicted);
Prf span_f1(const std::vector<std::vector<std::string>>& gold,
            const std::vector<std::vector<std::string>>& predicted);

// Fraction of utterances whose predicted label is any of the gold labels.
double intent_accuracy(const std::vector<std::vector<std::string>>& gold, const std::vector<std::string>& predicted);

struct EvalReport {
  std::size_t tokens = 0;
  std::size_t tokens_correct = 0;
  SpanCounts total;
  std::map<std::string, SpanCounts> per_label;
  std::size_t utterances = 0;
  std::size_t intents_correct = 0;

  Prf slots() const { return prf(total); }
  double intent_accuracy() const;
};

EvalReport evaluate(const std::vector<std::vector<std::string>>& gold_tags,
                    const std::vector<std::vector<std::string>>& predicted_tags,
                    const std::vector<std::vector<std::string>>& gold_intents,
                    const std::vector<std::string>& predicted_intents);

// conlleval layout followed by an intent line.
std::string format_report(const EvalReport& report);

}  // namespace cmnet::eval
