#pragma once

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mare/document.hpp"
#include "mare/schema.hpp"

namespace mare {

struct AssemblyConfig {
  int max_relation_width = 20;  // token-distance gate for completion and splitting
  bool enable_completion = true;
  bool enable_splitting = true;
};

struct AssembledAttribute {
  Attribute attribute;
  bool completed = false;  // added by complete_shared, not predicted directly
};

struct AssembledRelation {
  std::string label;
  std::vector<AssembledAttribute> attributes;  // sorted by (start, end)
  bool mandatory_complete = false;

  std::vector<Attribute> plain_attributes() const {
    std::vector<Attribute> out;
    out.reserve(attributes.size());
    for (const auto& a : attributes) out.push_back(a.attribute);
    return out;
  }

  Relation to_relation() const { return Relation{label, plain_attributes()}; }
};

namespace detail {

inline bool has_all_mandatory(const std::vector<AssembledAttribute>& attrs, const Schema& schema,
                              int label_idx) {
  for (const auto& role : schema.label(label_idx).roles) {
    if (!role.mandatory) continue;
    bool found = false;
    for (const auto& a : attrs)
      if (a.attribute.role == role.name) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

inline void sort_attributes(std::vector<AssembledAttribute>& attrs, const Schema& schema,
                            int label_idx) {
  std::sort(attrs.begin(), attrs.end(),
            [&](const AssembledAttribute& a, const AssembledAttribute& b) {
              int ra = schema.role_index(label_idx, a.attribute.role);
              int rb = schema.role_index(label_idx, b.attribute.role);
              return std::tie(a.attribute.span.start, a.attribute.span.end, ra) <
                     std::tie(b.attribute.span.start, b.attribute.span.end, rb);
            });
}

}  // namespace detail

// Flat (label, attribute) predictions -> one relation group per distinct
// label, attributes sorted, exact duplicates removed. Groups follow schema
// label order.
inline std::vector<AssembledRelation> group_by_label(
    const std::vector<std::pair<std::string, Attribute>>& predictions, const Schema& schema) {
  std::vector<AssembledRelation> out;
  for (size_t li = 0; li < schema.labels().size(); ++li) {
    const std::string& label = schema.labels()[li].name;
    std::set<std::pair<Span, std::string>> seen;
    AssembledRelation group;
    group.label = label;
    for (const auto& [plabel, attr] : predictions) {
      if (plabel != label) continue;
      if (!seen.insert({attr.span, attr.role}).second) continue;
      group.attributes.push_back({attr, false});
    }
    if (group.attributes.empty()) continue;
    detail::sort_attributes(group.attributes, schema, static_cast<int>(li));
    group.mandatory_complete = detail::has_all_mandatory(group.attributes, schema,
                                                         static_cast<int>(li));
    out.push_back(std::move(group));
  }
  return out;
}

// For every relation missing a mandatory role, borrow a compatible attribute
// from another relation in the document when it lies within the maximum
// relation width of the relation's nearest attribute. The donor keeps its
// copy; the nearest candidate wins, ties to the smaller start.
inline std::vector<AssembledRelation> complete_shared(std::vector<AssembledRelation> relations,
                                                      const Schema& schema,
                                                      const AssemblyConfig& config) {
  for (size_t ri = 0; ri < relations.size(); ++ri) {
    AssembledRelation& rel = relations[ri];
    int li = schema.label_index(rel.label);
    if (li < 0) continue;
    for (const auto& role : schema.label(li).roles) {
      if (!role.mandatory) continue;
      bool present = false;
      for (const auto& a : rel.attributes)
        if (a.attribute.role == role.name) {
          present = true;
          break;
        }
      if (present) continue;

      // Nearest compatible attribute of any other relation.
      struct Best {
        int distance = std::numeric_limits<int>::max();
        Span span{0, 0};
        bool found = false;
      } best;
      for (size_t rj = 0; rj < relations.size(); ++rj) {
        if (rj == ri) continue;
        int lj = schema.label_index(relations[rj].label);
        if (lj < 0) continue;
        for (const auto& cand : relations[rj].attributes) {
          int cand_role = schema.role_index(lj, cand.attribute.role);
          if (cand_role < 0) continue;
          if (!schema.roles_compatible(role,
                                       schema.label(lj).roles[static_cast<size_t>(cand_role)]))
            continue;
          int nearest = std::numeric_limits<int>::max();
          for (const auto& own : rel.attributes)
            nearest = std::min(nearest, cand.attribute.span.gap_to(own.attribute.span));
          if (nearest > config.max_relation_width) continue;
          // The span may not already serve another attribute of this relation.
          bool span_taken = false;
          for (const auto& own : rel.attributes)
            if (own.attribute.span == cand.attribute.span) span_taken = true;
          if (span_taken) continue;
          if (nearest < best.distance ||
              (nearest == best.distance &&
               std::tie(cand.attribute.span.start, cand.attribute.span.end) <
                   std::tie(best.span.start, best.span.end))) {
            best = {nearest, cand.attribute.span, true};
          }
        }
      }
      if (best.found) {
        rel.attributes.push_back({Attribute{best.span, role.name}, true});
        detail::sort_attributes(rel.attributes, schema, li);
      }
    }
    rel.mandatory_complete = detail::has_all_mandatory(rel.attributes, schema, li);
  }
  return relations;
}

// Splits a same-label group at the leftmost position where both sides hold
// every mandatory role and the token gap between the neighbouring attributes
// exceeds the maximum relation width; recurses on the right remainder.
inline std::vector<AssembledRelation> split_same_label(const AssembledRelation& relation,
                                                       const Schema& schema,
                                                       const AssemblyConfig& config) {
  int li = schema.label_index(relation.label);
  std::vector<AssembledRelation> out;
  if (li < 0 || relation.attributes.size() < 2) {
    out.push_back(relation);
    return out;
  }
  const auto& attrs = relation.attributes;
  for (size_t i = 1; i < attrs.size(); ++i) {
    int gap = attrs[i].attribute.span.start - attrs[i - 1].attribute.span.end;
    if (gap <= config.max_relation_width) continue;
    std::vector<AssembledAttribute> left(attrs.begin(), attrs.begin() + static_cast<long>(i));
    std::vector<AssembledAttribute> right(attrs.begin() + static_cast<long>(i), attrs.end());
    if (!detail::has_all_mandatory(left, schema, li) ||
        !detail::has_all_mandatory(right, schema, li))
      continue;
    AssembledRelation head;
    head.label = relation.label;
    head.attributes = std::move(left);
    head.mandatory_complete = true;
    out.push_back(std::move(head));
    AssembledRelation rest;
    rest.label = relation.label;
    rest.attributes = std::move(right);
    rest.mandatory_complete = true;
    auto tail = split_same_label(rest, schema, config);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
  }
  out.push_back(relation);
  return out;
}

// group -> complete -> split. Relations still missing mandatory roles are
// emitted flagged, never discarded.
inline std::vector<AssembledRelation> assemble(
    const std::vector<std::pair<std::string, Attribute>>& predictions, const Schema& schema,
    const AssemblyConfig& config) {
  std::vector<AssembledRelation> groups = group_by_label(predictions, schema);
  if (config.enable_completion) groups = complete_shared(std::move(groups), schema, config);
  if (!config.enable_splitting) return groups;
  std::vector<AssembledRelation> out;
  for (const auto& g : groups) {
    auto parts = split_same_label(g, schema, config);
    out.insert(out.end(), parts.begin(), parts.end());
  }
  return out;
}

}  // namespace mare
