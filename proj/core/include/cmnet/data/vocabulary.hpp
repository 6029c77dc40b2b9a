#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cmnet/data/corpus.hpp"

namespace cmnet::data {

// Splits UTF-8 text into code points (each returned as its byte sequence).
// Invalid bytes are returned one at a time.
std::vector<std::string> utf8_chars(std::string_view text);

// Dense string <-> id map in insertion order.
class Index {
 public:
  std::size_t add(const std::string& key);
  std::optional<std::size_t> find(const std::string& key) const;
  const std::string& at(std::size_t id) const { return keys_.at(id); }
  std::size_t size() const noexcept { return keys_.size(); }
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> keys_;
};

// Token, character, slot-tag and intent inventories. Ids follow first
// occurrence in the training corpus. Tokens and characters reserve id 0 for
// padding and id 1 for unknowns.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::string_view kPadSymbol = "<pad>";
  static constexpr std::string_view kUnkSymbol = "<unk>";

  static Vocabulary build(const Corpus& train);
  // Rebuilds a vocabulary from stored inventories (reserved entries included).
  static Vocabulary from_lists(std::vector<std::string> tokens, std::vector<std::string> chars,
                               std::vector<std::string> slots, std::vector<std::string> intents);

  std::size_t token_id(const std::string& token) const;
  std::size_t char_id(const std::string& ch) const;
  std::optional<std::size_t> slot_id(const std::string& tag) const { return slots_.find(tag); }
  std::optional<std::size_t> intent_id(const std::string& label) const { return intents_.find(label); }

  const Index& tokens() const noexcept { return tokens_; }
  const Index& chars() const noexcept { return chars_; }
  const Index& slots() const noexcept { return slots_; }
  const Index& intents() const noexcept { return intents_; }

  // FNV-1a over every inventory in id order.
  std::uint64_t hash() const;

 private:
  Vocabulary();
  Index tokens_;
  Index chars_;
  Index slots_;
  Index intents_;
};

}  // namespace cmnet::data
