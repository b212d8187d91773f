#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mare/rng.hpp"

namespace mare {

inline constexpr uint32_t kDefaultHashSpace = 1u << 20;

namespace detail {

inline std::string ascii_lower(std::string_view token) {
  std::string out(token);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Case/digit/punct pattern with runs collapsed; bytes >= 0x80 count as
// lowercase letters so multi-byte characters do not explode the shape.
inline std::string word_shape(std::string_view token) {
  std::string shape;
  char last = 0;
  for (unsigned char c : token) {
    char cls;
    if (c >= 'A' && c <= 'Z')
      cls = 'X';
    else if ((c >= 'a' && c <= 'z') || c >= 0x80)
      cls = 'x';
    else if (c >= '0' && c <= '9')
      cls = 'd';
    else
      cls = 'p';
    if (cls != last) shape.push_back(cls);
    last = cls;
  }
  return shape;
}

inline bool all_digits(std::string_view token) {
  if (token.empty()) return false;
  for (char c : token)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace detail

// Hashed sparse features for one token position. Deterministic for identical
// (tokens, position); ids are sorted and unique within [0, hash_space).
// Stands in for the contextualized embedder: lowercased identity, affixes,
// shape, digit flag, +-2 window identities, adjacent bigrams.
inline std::vector<uint32_t> extract_features(const std::vector<std::string>& tokens,
                                              size_t position,
                                              uint32_t hash_space = kDefaultHashSpace) {
  static constexpr std::string_view kBoundary = "<pad>";
  std::vector<std::string> raw;
  raw.reserve(24);

  auto window = [&](long offset) -> std::string {
    long p = static_cast<long>(position) + offset;
    if (p < 0 || p >= static_cast<long>(tokens.size())) return std::string(kBoundary);
    return detail::ascii_lower(tokens[static_cast<size_t>(p)]);
  };

  const std::string cur = detail::ascii_lower(tokens.at(position));
  raw.push_back("w0=" + cur);
  for (size_t len = 1; len <= 3; ++len) {
    raw.push_back("pre" + std::to_string(len) + "=" + cur.substr(0, std::min(len, cur.size())));
    raw.push_back("suf" + std::to_string(len) + "=" +
                  cur.substr(cur.size() - std::min(len, cur.size())));
  }
  raw.push_back("shape=" + detail::word_shape(tokens[position]));
  raw.push_back(std::string("digit=") + (detail::all_digits(tokens[position]) ? "1" : "0"));
  raw.push_back("w-2=" + window(-2));
  raw.push_back("w-1=" + window(-1));
  raw.push_back("w+1=" + window(+1));
  raw.push_back("w+2=" + window(+2));
  raw.push_back("bg-1=" + window(-1) + "_" + cur);
  raw.push_back("bg+1=" + cur + "_" + window(+1));

  std::vector<uint32_t> ids;
  ids.reserve(raw.size());
  for (const auto& f : raw)
    ids.push_back(static_cast<uint32_t>(fnv1a64(f) % hash_space));
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Per-token feature sets for a whole document.
inline std::vector<std::vector<uint32_t>> extract_document_features(
    const std::vector<std::string>& tokens, uint32_t hash_space = kDefaultHashSpace) {
  std::vector<std::vector<uint32_t>> out;
  out.reserve(tokens.size());
  for (size_t t = 0; t < tokens.size(); ++t) out.push_back(extract_features(tokens, t, hash_space));
  return out;
}

}  // namespace mare
