#include "cmnet/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "cmnet/errors.hpp"

namespace cmnet::eval {

namespace {

data::TagParts bio_parts(const std::string& tag) {
  auto parts = data::split_tag(tag);
  if (!parts) return {};
  if (parts->prefix == 'S') parts->prefix = 'B';
  if (parts->prefix == 'E') parts->prefix = 'I';
  return *parts;
}

bool chunk_ends(const data::TagParts& prev, const data::TagParts& cur) {
  if (prev.prefix == 'O') return false;
  return cur.prefix == 'O' || cur.prefix == 'B' || prev.type != cur.type;
}

bool chunk_starts(const data::TagParts& prev, const data::TagParts& cur) {
  if (cur.prefix == 'O') return false;
  return cur.prefix == 'B' || prev.prefix == 'O' || prev.type != cur.type;
}

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractError(std::string(what) + ": " + std::to_string(a) + " gold vs " + std::to_string(b) +
                        " predicted");
  }
}

}  // namespace

std::vector<Span> extract_spans(const std::vector<std::string>& tags) {
  std::vector<Span> spans;
  data::TagParts prev;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto cur = bio_parts(tags[i]);
    if (open && chunk_ends(prev, cur)) {
      spans.back().end = i - 1;
      open = false;
    }
    if (chunk_starts(prev, cur)) {
      spans.push_back({cur.type, i, i});
      open = true;
    }
    prev = cur;
  }
  if (open) spans.back().end = tags.size() - 1;
  return spans;
}

std::vector<std::string> spans_to_tags(const std::vector<Span>& spans, std::size_t n, data::TagScheme scheme) {
  std::vector<std::string> tags(n, "O");
  const bool bioes = scheme == data::TagScheme::kBioes;
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= n) throw ContractError("spans_to_tags: span outside the sequence");
    for (std::size_t i = s.start; i <= s.end; ++i) {
      char prefix = i == s.start ? 'B' : 'I';
      if (bioes && s.start == s.end) prefix = 'S';
      else if (bioes && i == s.end) prefix = 'E';
      tags[i] = data::join_tag(prefix, s.label);
    }
  }
  return tags;
}

std::vector<std::string> repair_tags(const std::vector<std::string>& tags, data::TagScheme scheme) {
  return spans_to_tags(extract_spans(tags), tags.size(), scheme);
}

Prf prf(const SpanCounts& c) {
  Prf out;
  if (c.predicted) out.precision = static_cast<double>(c.correct) / static_cast<double>(c.predicted);
  if (c.gold) out.recall = static_cast<double>(c.correct) / static_cast<double>(c.gold);
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

SpanCounts span_counts(const std::vector<std::vector<std::string>>& gold,
                       const std::vector<std::vector<std::string>>& predicted) {
  check_aligned(gold.size(), predicted.size(), "span_f1: utterance count");
  SpanCounts c;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    check_aligned(gold[u].size(), predicted[u].size(), "span_f1: token count");
    const auto g = extract_spans(gold[u]);
    const auto p = extract_spans(predicted[u]);
    const std::set<Span> gs(g.begin(), g.end());
    c.gold += g.size();
    c.predicted += p.size();
    for (const auto& s : p) c.correct += gs.count(s);
  }
  return c;
}

Prf span_f1(const std::vector<std::vector<std::string>>& gold,
            const std::vector<std::vector<std::string>>& predicted) {
  return prf(span_counts(gold, predicted));
}

double intent_accuracy(const std::vector<std::vector<std::string>>& gold, const std::vector<std::string>& predicted) {
  check_aligned(gold.size(), predicted.size(), "intent_accuracy: utterance count");
  if (gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    hits += std::find(gold[u].begin(), gold[u].end(), predicted[u]) != gold[u].end();
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double EvalReport::intent_accuracy() const {
  return utterances ? static_cast<double>(intents_correct) / static_cast<double>(utterances) : 0.0;
}

EvalReport evaluate(const std::vector<std::vector<std::string>>& gold_tags,
                    const std::vector<std::vector<std::string>>& predicted_tags,
                    const std::vector<std::vector<std::string>>& gold_intents,
                    const std::vector<std::string>& predicted_intents) {
  check_aligned(gold_tags.size(), predicted_tags.size(), "evaluate: utterance count");
  check_aligned(gold_intents.size(), predicted_intents.size(), "evaluate: intent count");
  check_aligned(gold_tags.size(), gold_intents.size(), "evaluate: slot vs intent utterances");
  EvalReport r;
  r.utterances = gold_tags.size();
  for (std::size_t u = 0; u < gold_tags.size(); ++u) {
    const auto& g = gold_tags[u];
    const auto& p = predicted_tags[u];
    check_aligned(g.size(), p.size(), "evaluate: token count");
    r.tokens += g.size();
    for (std::size_t t = 0; t < g.size(); ++t) r.tokens_correct += g[t] == p[t];
    const auto gs = extract_spans(g);
    const auto ps = extract_spans(p);
    const std::set<Span> gold_set(gs.begin(), gs.end());
    for (const auto& s : gs) {
      ++r.total.gold;
      ++r.per_label[s.label].gold;
    }
    for (const auto& s : ps) {
      ++r.total.predicted;
      auto& label = r.per_label[s.label];
      ++label.predicted;
      if (gold_set.count(s)) {
        ++r.total.correct;
        ++label.correct;
      }
    }
  }
  for (std::size_t u = 0; u < gold_intents.size(); ++u) {
    const auto& g = gold_intents[u];
    r.intents_correct += std::find(g.begin(), g.end(), predicted_intents[u]) != g.end();
  }
  return r;
}

std::string format_report(const EvalReport& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "processed %zu tokens with %zu phrases; found: %zu phrases; correct: %zu.\n",
                r.tokens, r.total.gold, r.total.predicted, r.total.correct);
  out += buf;
  const auto all = r.slots();
  const double accuracy = r.tokens ? 100.0 * static_cast<double>(r.tokens_correct) / static_cast<double>(r.tokens) : 0.0;
  std::snprintf(buf, sizeof buf, "accuracy: %6.2f%%; precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f\n", accuracy,
                100.0 * all.precision, 100.0 * all.recall, 100.0 * all.f1);
  out += buf;
  for (const auto& [label, counts] : r.per_label) {
    const auto s = prf(counts);
    std::snprintf(buf, sizeof buf, "%17s: precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f  %zu\n", label.c_str(),
                  100.0 * s.precision, 100.0 * s.recall, 100.0 * s.f1, counts.predicted);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "intent accuracy: %6.2f%% (%zu/%zu)\n", 100.0 * r.intent_accuracy(),
                r.intents_correct, r.utterances);
  out += buf;
  return out;
}

}  // namespace cmnet::eval
