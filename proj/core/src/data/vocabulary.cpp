#include "cmnet/data/vocabulary.hpp"

#include "cmnet/errors.hpp"

namespace cmnet::data {

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((lead & 0xE0) == 0xC0) len = 2;
    else if ((lead & 0xF0) == 0xE0) len = 3;
    else if ((lead & 0xF8) == 0xF0) len = 4;
    bool ok = i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      ok = (static_cast<unsigned char>(text[i + k]) & 0xC0) == 0x80;
    }
    if (!ok) len = 1;
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::size_t Index::add(const std::string& key) {
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const auto id = keys_.size();
  ids_.emplace(key, id);
  keys_.push_back(key);
  return id;
}

std::optional<std::size_t> Index::find(const std::string& key) const {
  auto it = ids_.find(key);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Vocabulary::Vocabulary() {
  for (auto* index : {&tokens_, &chars_}) {
    index->add(std::string(kPadSymbol));
    index->add(std::string(kUnkSymbol));
  }
}

Vocabulary Vocabulary::build(const Corpus& train) {
  Vocabulary vocab;
  for (const auto& utt : train) {
    for (std::size_t i = 0; i < utt.size(); ++i) {
      vocab.tokens_.add(utt.tokens[i]);
      for (const auto& ch : utf8_chars(utt.tokens[i])) vocab.chars_.add(ch);
      vocab.slots_.add(utt.slot_tags[i]);
    }
    for (const auto& label : utt.intents) vocab.intents_.add(label);
  }
  return vocab;
}

Vocabulary Vocabulary::from_lists(std::vector<std::string> tokens, std::vector<std::string> chars,
                                  std::vector<std::string> slots, std::vector<std::string> intents) {
  auto check_reserved = [](const std::vector<std::string>& list, const char* what) {
    if (list.size() < 2 || list[0] != kPadSymbol || list[1] != kUnkSymbol) {
      throw ContractError(std::string("vocabulary: ") + what + " inventory lacks reserved entries");
    }
  };
  check_reserved(tokens, "token");
  check_reserved(chars, "char");
  Vocabulary vocab;
  for (std::size_t i = 2; i < tokens.size(); ++i) vocab.tokens_.add(tokens[i]);
  for (std::size_t i = 2; i < chars.size(); ++i) vocab.chars_.add(chars[i]);
  for (auto& s : slots) vocab.slots_.add(s);
  for (auto& s : intents) vocab.intents_.add(s);
  if (vocab.tokens_.size() != tokens.size() || vocab.chars_.size() != chars.size() ||
      vocab.slots_.size() != slots.size() || vocab.intents_.size() != intents.size()) {
    throw ContractError("vocabulary: duplicate entries in stored inventory");
  }
  return vocab;
}

std::size_t Vocabulary::token_id(const std::string& token) const {
  return tokens_.find(token).value_or(kUnk);
}

std::size_t Vocabulary::char_id(const std::string& ch) const { return chars_.find(ch).value_or(kUnk); }

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xFF;  // separator byte never produced by UTF-8 text
    h *= 1099511628211ULL;
  };
  for (const auto* index : {&tokens_, &chars_, &slots_, &intents_}) {
    mix(std::to_string(index->size()));
    for (const auto& key : index->keys()) mix(key);
  }
  return h;
}

}  // namespace cmnet::data
