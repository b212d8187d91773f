#pragma once

#include <algorithm>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mare/document.hpp"
#include "mare/schema.hpp"

namespace mare {

enum class TagKind : uint8_t { Outside = 0, Begin = 1, Inside = 2 };

// One element of T = {b, i} x L x A_l  u  {o}.
struct Tag {
  TagKind kind = TagKind::Outside;
  std::string label;  // empty for Outside
  std::string role;   // empty for Outside

  static Tag outside() { return Tag{}; }
  static Tag begin(std::string label, std::string role) {
    return Tag{TagKind::Begin, std::move(label), std::move(role)};
  }
  static Tag inside(std::string label, std::string role) {
    return Tag{TagKind::Inside, std::move(label), std::move(role)};
  }

  bool is_outside() const { return kind == TagKind::Outside; }

  bool same_attribute(const Tag& other) const {
    return label == other.label && role == other.role;
  }

  auto operator<=>(const Tag&) const = default;
};

// Debug/model-file rendering: o | b-<label>-<role> | i-<label>-<role>.
// Label and role names are '-'-free by schema validation.
inline std::string to_string(const Tag& tag) {
  if (tag.is_outside()) return "o";
  return (tag.kind == TagKind::Begin ? "b-" : "i-") + tag.label + "-" + tag.role;
}

inline Tag tag_from_string(std::string_view text) {
  if (text == "o") return Tag::outside();
  if (text.size() < 2 || (text[0] != 'b' && text[0] != 'i') || text[1] != '-')
    throw std::runtime_error("tag: cannot parse '" + std::string(text) + "'");
  auto dash = text.find('-', 2);
  if (dash == std::string_view::npos || dash + 1 >= text.size())
    throw std::runtime_error("tag: cannot parse '" + std::string(text) + "'");
  Tag t;
  t.kind = text[0] == 'b' ? TagKind::Begin : TagKind::Inside;
  t.label = std::string(text.substr(2, dash - 2));
  t.role = std::string(text.substr(dash + 1));
  return t;
}

using TagSequence = std::vector<Tag>;

// Deterministic tag inventory: o first, then per schema label order and role
// order, b before i. Size is 1 + 2 * sum_l |A_l|.
class TagSet {
 public:
  explicit TagSet(const Schema& schema) {
    tags_.push_back(Tag::outside());
    for (const auto& l : schema.labels()) {
      for (const auto& r : l.roles) {
        tags_.push_back(Tag::begin(l.name, r.name));
        tags_.push_back(Tag::inside(l.name, r.name));
      }
    }
  }

  const std::vector<Tag>& tags() const { return tags_; }
  size_t size() const { return tags_.size(); }
  const Tag& operator[](size_t i) const { return tags_.at(i); }

  int index_of(const Tag& tag) const {
    for (size_t i = 0; i < tags_.size(); ++i)
      if (tags_[i] == tag) return static_cast<int>(i);
    return -1;
  }

  std::vector<int> to_indices(const TagSequence& seq) const {
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& t : seq) {
      int idx = index_of(t);
      if (idx < 0) throw std::runtime_error("tag '" + to_string(t) + "' not in tag set");
      out.push_back(idx);
    }
    return out;
  }

  TagSequence from_indices(const std::vector<int>& indices) const {
    TagSequence out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(tags_.at(static_cast<size_t>(i)));
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(tags_.size());
    for (const auto& t : tags_) out.push_back(to_string(t));
    return out;
  }

 private:
  std::vector<Tag> tags_;
};

inline std::vector<Tag> tag_set(const Schema& schema) { return TagSet(schema).tags(); }

struct DroppedAttribute {
  std::string label;
  Attribute attribute;
  std::string reason;
};

struct EncodingReport {
  std::vector<DroppedAttribute> dropped;

  bool conflict_free() const { return dropped.empty(); }
};

// Gold relations -> per-token tags. Overlapping attributes cannot share
// tokens, so exactly one of each overlapping group survives: priority goes to
// the relation whose earliest attribute starts first, then schema label
// order, then role order, then span position. Losers are dropped whole and
// reported.
inline std::pair<TagSequence, EncodingReport> encode(const Document& doc, const Schema& schema) {
  struct Candidate {
    int relation_earliest;
    int label_idx;
    int role_idx;
    Span span;
    size_t relation_index;
    const Attribute* attribute;
  };
  std::vector<Candidate> candidates;
  for (size_t ri = 0; ri < doc.relations.size(); ++ri) {
    const Relation& rel = doc.relations[ri];
    int li = schema.label_index(rel.label);
    if (li < 0) throw std::runtime_error("encode: unknown label '" + rel.label + "'");
    int earliest = doc.token_count();
    for (const auto& a : rel.attributes) earliest = std::min(earliest, a.span.start);
    for (const auto& a : rel.attributes) {
      int role_idx = schema.role_index(li, a.role);
      if (role_idx < 0)
        throw std::runtime_error("encode: role '" + a.role + "' not in label '" + rel.label + "'");
      candidates.push_back({earliest, li, role_idx, a.span, ri, &a});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.relation_earliest, a.label_idx, a.role_idx, a.span.start, a.span.end,
                    a.relation_index) <
           std::tie(b.relation_earliest, b.label_idx, b.role_idx, b.span.start, b.span.end,
                    b.relation_index);
  });

  TagSequence tags(static_cast<size_t>(doc.token_count()), Tag::outside());
  std::vector<bool> taken(tags.size(), false);
  EncodingReport report;
  for (const auto& c : candidates) {
    bool free = true;
    for (int t = c.span.start; t < c.span.end; ++t)
      if (taken[static_cast<size_t>(t)]) {
        free = false;
        break;
      }
    const std::string& label = schema.label(c.label_idx).name;
    const std::string& role = schema.label(c.label_idx).roles[static_cast<size_t>(c.role_idx)].name;
    if (!free) {
      report.dropped.push_back({doc.relations[c.relation_index].label, *c.attribute,
                                "overlaps a higher-priority attribute"});
      continue;
    }
    for (int t = c.span.start; t < c.span.end; ++t) {
      taken[static_cast<size_t>(t)] = true;
      tags[static_cast<size_t>(t)] =
          t == c.span.start ? Tag::begin(label, role) : Tag::inside(label, role);
    }
  }
  return {std::move(tags), std::move(report)};
}

// Tags -> flat (label, attribute) pairs. Maximal b-i runs with one
// (label, role) become one attribute; an i tag that does not continue a run
// of the same (label, role) is repaired to b. Total on any tag sequence.
inline std::vector<std::pair<std::string, Attribute>> decode(const TagSequence& tags,
                                                             const Schema& schema) {
  (void)schema;  // the run structure is fully determined by the tags
  std::vector<std::pair<std::string, Attribute>> out;
  size_t t = 0;
  const size_t n = tags.size();
  while (t < n) {
    if (tags[t].is_outside()) {
      ++t;
      continue;
    }
    // Begin starts a run; a bare Inside is repaired to Begin.
    size_t start = t;
    const Tag& head = tags[t];
    ++t;
    while (t < n && tags[t].kind == TagKind::Inside && tags[t].same_attribute(head)) ++t;
    out.push_back({head.label,
                   Attribute{Span{static_cast<int>(start), static_cast<int>(t)}, head.role}});
  }
  return out;
}

}  // namespace mare
