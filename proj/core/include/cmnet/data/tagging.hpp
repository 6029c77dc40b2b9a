#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmnet::data {

enum class TagScheme { kBio2, kBioes };

std::string_view scheme_name(TagScheme scheme);
// Accepts "bio2"/"bio" and "bioes".
std::optional<TagScheme> parse_scheme(std::string_view name);

// "B-artist" -> {'B', "artist"}; "O" -> {'O', ""}.
struct TagParts {
  char prefix = 'O';
  std::string type;
};

// nullopt if the tag is neither "O" nor "<P>-<type>" with a non-empty type.
std::optional<TagParts> split_tag(std::string_view tag);
std::string join_tag(char prefix, std::string_view type);

// Index of the first position that breaks the scheme, or nullopt if legal.
// Position tags.size() means the sequence ends inside an open span.
std::optional<std::size_t> first_violation(const std::vector<std::string>& tags, TagScheme scheme);
bool is_valid(const std::vector<std::string>& tags, TagScheme scheme);

// Both throw ConversionError on illegal input.
std::vector<std::string> bio_to_bioes(const std::vector<std::string>& tags);
std::vector<std::string> bioes_to_bio(const std::vector<std::string>& tags);

}  // namespace cmnet::data
