#include "cmnet/data/tagging.hpp"

#include "cmnet/errors.hpp"

namespace cmnet::data {

std::string_view scheme_name(TagScheme scheme) {
  return scheme == TagScheme::kBio2 ? "bio2" : "bioes";
}

std::optional<TagScheme> parse_scheme(std::string_view name) {
  if (name == "bio2" || name == "bio") return TagScheme::kBio2;
  if (name == "bioes") return TagScheme::kBioes;
  return std::nullopt;
}

std::optional<TagParts> split_tag(std::string_view tag) {
  if (tag == "O") return TagParts{};
  if (tag.size() < 3 || tag[1] != '-') return std::nullopt;
  const char p = tag[0];
  if (p != 'B' && p != 'I' && p != 'E' && p != 'S') return std::nullopt;
  return TagParts{p, std::string(tag.substr(2))};
}

std::string join_tag(char prefix, std::string_view type) {
  if (prefix == 'O') return "O";
  std::string out(1, prefix);
  out += '-';
  out += type;
  return out;
}

std::optional<std::size_t> first_violation(const std::vector<std::string>& tags, TagScheme scheme) {
  // `open` holds the type of a span that must be continued by I-/E-.
  std::optional<std::string> open;
  std::optional<std::string> prev_type;  // BIO2: type an I- tag may continue
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto parts = split_tag(tags[i]);
    if (!parts) return i;
    const char p = parts->prefix;
    if (scheme == TagScheme::kBio2) {
      if (p == 'E' || p == 'S') return i;
      if (p == 'I' && prev_type != parts->type) return i;
      prev_type = p == 'O' ? std::nullopt : std::optional<std::string>(parts->type);
      continue;
    }
    if (open) {
      if ((p != 'I' && p != 'E') || parts->type != *open) return i;
      if (p == 'E') open.reset();
    } else {
      if (p == 'I' || p == 'E') return i;
      if (p == 'B') open = parts->type;
    }
  }
  if (open) return tags.size();
  return std::nullopt;
}

bool is_valid(const std::vector<std::string>& tags, TagScheme scheme) {
  return !first_violation(tags, scheme).has_value();
}

std::vector<std::string> bio_to_bioes(const std::vector<std::string>& tags) {
  if (auto bad = first_violation(tags, TagScheme::kBio2)) {
    throw ConversionError("bio_to_bioes: invalid BIO2 sequence at position " + std::to_string(*bad));
  }
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto parts = *split_tag(tags[i]);
    if (parts.prefix == 'O') {
      out.emplace_back("O");
      continue;
    }
    const bool continues = i + 1 < tags.size() && tags[i + 1] == join_tag('I', parts.type);
    if (parts.prefix == 'B') {
      out.push_back(join_tag(continues ? 'B' : 'S', parts.type));
    } else {
      out.push_back(join_tag(continues ? 'I' : 'E', parts.type));
    }
  }
  return out;
}

std::vector<std::string> bioes_to_bio(const std::vector<std::string>& tags) {
  if (auto bad = first_violation(tags, TagScheme::kBioes)) {
    throw ConversionError("bioes_to_bio: invalid BIOES sequence at position " + std::to_string(*bad));
  }
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const auto& tag : tags) {
    const auto parts = *split_tag(tag);
    switch (parts.prefix) {
      case 'S': out.push_back(join_tag('B', parts.type)); break;
      case 'E': out.push_back(join_tag('I', parts.type)); break;
      default: out.push_back(tag);
    }
  }
  return out;
}

}  // namespace cmnet::data
