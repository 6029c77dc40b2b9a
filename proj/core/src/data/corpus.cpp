#include "cmnet/data/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "cmnet/errors.hpp"

namespace cmnet::data {

namespace {

constexpr std::string_view kIntentMarker = "#intent";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Corpus parse_corpus(std::istream& in, TagScheme scheme) {
  Corpus corpus;
  Utterance current;
  std::size_t record_start = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      if (!current.tokens.empty()) {
        throw ParseError(line_no, "record starting at line " + std::to_string(record_start) +
                                      " has no #intent line");
      }
      continue;
    }
    if (current.tokens.empty()) record_start = line_no;
    const auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw ParseError(line_no, "expected exactly two tab-separated fields");
    }
    if (fields[0] == kIntentMarker) {
      if (current.tokens.empty()) throw ParseError(line_no, "empty utterance");
      current.intents = split(fields[1], '#');
      for (const auto& label : current.intents) {
        if (label.empty()) throw ParseError(line_no, "empty intent label");
      }
      if (auto bad = first_violation(current.slot_tags, scheme)) {
        const std::size_t at = *bad < current.size() ? record_start + *bad : line_no - 1;
        throw ParseError(at, "illegal " + std::string(scheme_name(scheme)) + " tag sequence");
      }
      corpus.push_back(std::move(current));
      current = Utterance{};
      continue;
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw ParseError(line_no, "token/tag count mismatch: empty token or tag");
    }
    if (!split_tag(fields[1])) throw ParseError(line_no, "malformed tag '" + fields[1] + "'");
    current.tokens.push_back(fields[0]);
    current.slot_tags.push_back(fields[1]);
  }
  if (!current.tokens.empty()) {
    throw ParseError(line_no, "record starting at line " + std::to_string(record_start) +
                                  " has no #intent line");
  }
  if (corpus.empty()) throw ParseError(line_no, "no utterances");
  return corpus;
}

Corpus read_corpus_file(const std::filesystem::path& path, TagScheme scheme) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open corpus file " + path.string());
  return parse_corpus(in, scheme);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    const auto& utt = corpus[u];
    if (u) out << '\n';
    for (std::size_t i = 0; i < utt.size(); ++i) out << utt.tokens[i] << '\t' << utt.slot_tags[i] << '\n';
    out << kIntentMarker << '\t';
    for (std::size_t k = 0; k < utt.intents.size(); ++k) out << (k ? "#" : "") << utt.intents[k];
    out << '\n';
  }
}

void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_corpus(out, corpus);
}

}  // namespace cmnet::data
