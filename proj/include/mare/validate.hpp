#pragma once

#include <string>
#include <vector>

#include "mare/document.hpp"
#include "mare/schema.hpp"

namespace mare {

// Violations are data, not failures.
struct Violation {
  std::string doc_id;
  std::string message;
};

// Schema conformance: labels in L, roles in A_l, and when a role declares
// entity types, every attribute span must be backed by an entity of a
// compatible type.
inline std::vector<Violation> validate_document(const Document& doc, const Schema& schema) {
  std::vector<Violation> out;
  for (size_t ri = 0; ri < doc.relations.size(); ++ri) {
    const Relation& rel = doc.relations[ri];
    int li = schema.label_index(rel.label);
    if (li < 0) {
      out.push_back({doc.id, "relations[" + std::to_string(ri) + "]: unknown label '" +
                                 rel.label + "'"});
      continue;
    }
    for (size_t ai = 0; ai < rel.attributes.size(); ++ai) {
      const Attribute& a = rel.attributes[ai];
      int role_idx = schema.role_index(li, a.role);
      std::string where =
          "relations[" + std::to_string(ri) + "].attributes[" + std::to_string(ai) + "]";
      if (role_idx < 0) {
        out.push_back({doc.id, where + ": role '" + a.role + "' not in role set of label '" +
                                   rel.label + "'"});
        continue;
      }
      const RoleDef& role = schema.label(li).roles[static_cast<size_t>(role_idx)];
      if (role.entity_types.empty()) continue;
      bool backed = false;
      for (const auto& e : doc.entities) {
        if (e.span == a.span && schema.type_compatible(role, e.type)) {
          backed = true;
          break;
        }
      }
      if (!backed)
        out.push_back({doc.id, where + ": span [" + std::to_string(a.span.start) + ", " +
                                   std::to_string(a.span.end) +
                                   ") has no entity of a type compatible with role '" + a.role +
                                   "' of label '" + rel.label + "'"});
    }
  }
  return out;
}

}  // namespace mare
