#pragma once

#include <string>
#include <vector>

#include "mare/span.hpp"

namespace mare {

struct Entity {
  Span span;
  std::string type;

  auto operator<=>(const Entity&) const = default;
};

// One (span, role) pair inside a relation instance.
struct Attribute {
  Span span;
  std::string role;

  auto operator<=>(const Attribute&) const = default;
};

struct Relation {
  std::string label;
  std::vector<Attribute> attributes;  // m >= 1; spans pairwise distinct

  auto operator<=>(const Relation&) const = default;
};

// Tokenized text with gold entities and multi-attribute relations. Documents
// are immutable values once parsed; transforms return copies.
struct Document {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<Entity> entities;
  std::vector<Relation> relations;
  std::string source;  // news | rss | twitter; empty when absent

  int token_count() const { return static_cast<int>(tokens.size()); }

  auto operator<=>(const Document&) const = default;
};

}  // namespace mare
