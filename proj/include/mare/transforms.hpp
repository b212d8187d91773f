#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "mare/document.hpp"
#include "mare/schema.hpp"

namespace mare {

struct TriggerIssue {
  std::string doc_id;
  size_t relation_index;
  std::string label;
  std::string reason;
};

struct TriggerReport {
  std::vector<TriggerIssue> unresolved;
  size_t multi_trigger_relations = 0;
};

// Reduce every relation to exactly one attribute of its label's designated
// trigger role: the first (smallest start) trigger span is kept, surplus
// trigger attributes are dropped. Relations without any trigger-role
// attribute are left untouched and reported. Idempotent.
inline Document assign_triggers(const Document& doc, const Schema& schema,
                                TriggerReport* report = nullptr) {
  Document out = doc;
  for (size_t ri = 0; ri < out.relations.size(); ++ri) {
    Relation& rel = out.relations[ri];
    int li = schema.label_index(rel.label);
    const RoleDef* trig = li >= 0 ? schema.trigger_role(li) : nullptr;
    if (trig == nullptr) {
      if (report != nullptr)
        report->unresolved.push_back({doc.id, ri, rel.label,
                                      li < 0 ? "unknown label" : "label has no designated trigger role"});
      continue;
    }
    std::vector<size_t> trigger_positions;
    for (size_t ai = 0; ai < rel.attributes.size(); ++ai)
      if (rel.attributes[ai].role == trig->name) trigger_positions.push_back(ai);
    if (trigger_positions.empty()) {
      if (report != nullptr)
        report->unresolved.push_back(
            {doc.id, ri, rel.label, "no attribute of trigger role '" + trig->name + "'"});
      continue;
    }
    if (trigger_positions.size() == 1) continue;
    if (report != nullptr) report->multi_trigger_relations += 1;
    size_t keep = trigger_positions[0];
    for (size_t pos : trigger_positions)
      if (rel.attributes[pos].span.start < rel.attributes[keep].span.start) keep = pos;
    std::vector<Attribute> kept;
    for (size_t ai = 0; ai < rel.attributes.size(); ++ai) {
      if (rel.attributes[ai].role == trig->name && ai != keep) continue;
      kept.push_back(rel.attributes[ai]);
    }
    rel.attributes = std::move(kept);
  }
  return out;
}

// True when every relation carries exactly two attribute instances whose
// roles are mandatory for the relation's label.
inline bool is_binary_document(const Document& doc, const Schema& schema) {
  for (const auto& rel : doc.relations) {
    int li = schema.label_index(rel.label);
    if (li < 0) return false;
    size_t mandatory_instances = 0;
    for (const auto& a : rel.attributes) {
      int role_idx = schema.role_index(li, a.role);
      if (role_idx >= 0 && schema.label(li).roles[static_cast<size_t>(role_idx)].mandatory)
        ++mandatory_instances;
    }
    if (mandatory_instances != 2) return false;
  }
  return true;
}

// Subset of documents whose relations all have exactly two mandatory-role
// attributes. Relation-free documents satisfy the condition vacuously and
// are kept by default; exclude_relation_free flips that.
inline std::vector<Document> binary_subset(const std::vector<Document>& corpus,
                                           const Schema& schema,
                                           bool exclude_relation_free = false) {
  std::vector<Document> out;
  for (const auto& doc : corpus) {
    if (exclude_relation_free && doc.relations.empty()) continue;
    if (is_binary_document(doc, schema)) out.push_back(doc);
  }
  return out;
}

}  // namespace mare
