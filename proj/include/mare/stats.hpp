#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mare/document.hpp"
#include "mare/schema.hpp"

namespace mare {

// Corpus-level tallies. Raw counts are kept (rather than ratios) so partial
// stats merge associatively; explicitness is derived on demand.
struct CorpusStats {
  size_t document_count = 0;
  size_t relation_count = 0;
  size_t entity_count = 0;
  size_t word_count = 0;
  size_t multi_trigger_relation_count = 0;

  // label -> attributes-per-relation -> relation count
  std::map<std::string, std::map<size_t, size_t>> attribute_count_distribution;
  // (label, role) -> attribute instance count
  std::map<std::pair<std::string, std::string>, size_t> role_attribute_counts;
  // entity type -> entity count
  std::map<std::string, size_t> entity_type_counts;

  // explicitness(role, label) = attribute frequency / count of entities whose
  // type is compatible with the role; 0 when the denominator is 0.
  double explicitness(const Schema& schema, const std::string& label,
                      const std::string& role) const {
    const RoleDef* def = schema.find_role(label, role);
    if (def == nullptr) return 0.0;
    size_t denom = 0;
    for (const auto& t : def->entity_types) {
      auto it = entity_type_counts.find(t);
      if (it != entity_type_counts.end()) denom += it->second;
    }
    if (denom == 0) return 0.0;
    size_t num = 0;
    auto it = role_attribute_counts.find({label, role});
    if (it != role_attribute_counts.end()) num = it->second;
    return static_cast<double>(num) / static_cast<double>(denom);
  }

  CorpusStats& merge(const CorpusStats& other) {
    document_count += other.document_count;
    relation_count += other.relation_count;
    entity_count += other.entity_count;
    word_count += other.word_count;
    multi_trigger_relation_count += other.multi_trigger_relation_count;
    for (const auto& [label, hist] : other.attribute_count_distribution)
      for (const auto& [k, v] : hist) attribute_count_distribution[label][k] += v;
    for (const auto& [key, v] : other.role_attribute_counts) role_attribute_counts[key] += v;
    for (const auto& [type, v] : other.entity_type_counts) entity_type_counts[type] += v;
    return *this;
  }

  nlohmann::ordered_json to_json(const Schema& schema) const {
    nlohmann::ordered_json j;
    j["documentCount"] = document_count;
    j["relationCount"] = relation_count;
    j["entityCount"] = entity_count;
    j["wordCount"] = word_count;
    j["multiTriggerRelationCount"] = multi_trigger_relation_count;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [label, h] : attribute_count_distribution) {
      nlohmann::ordered_json hl = nlohmann::ordered_json::object();
      for (const auto& [k, v] : h) hl[std::to_string(k)] = v;
      hist[label] = std::move(hl);
    }
    j["attributeCountDistribution"] = std::move(hist);
    nlohmann::ordered_json expl = nlohmann::ordered_json::object();
    for (const auto& l : schema.labels()) {
      nlohmann::ordered_json el = nlohmann::ordered_json::object();
      for (const auto& r : l.roles) el[r.name] = explicitness(schema, l.name, r.name);
      expl[l.name] = std::move(el);
    }
    j["explicitness"] = std::move(expl);
    return j;
  }
};

inline CorpusStats document_stats(const Document& doc, const Schema& schema) {
  CorpusStats s;
  s.document_count = 1;
  s.relation_count = doc.relations.size();
  s.entity_count = doc.entities.size();
  s.word_count = doc.tokens.size();
  for (const auto& e : doc.entities) s.entity_type_counts[e.type] += 1;
  for (const auto& rel : doc.relations) {
    s.attribute_count_distribution[rel.label][rel.attributes.size()] += 1;
    for (const auto& a : rel.attributes) s.role_attribute_counts[{rel.label, a.role}] += 1;
    int li = schema.label_index(rel.label);
    if (li >= 0) {
      const RoleDef* trig = schema.trigger_role(li);
      if (trig != nullptr) {
        size_t trigger_attrs = 0;
        for (const auto& a : rel.attributes)
          if (a.role == trig->name) ++trigger_attrs;
        if (trigger_attrs >= 2) s.multi_trigger_relation_count += 1;
      }
    }
  }
  return s;
}

inline CorpusStats corpus_stats(const std::vector<Document>& corpus, const Schema& schema) {
  CorpusStats total;
  for (const auto& doc : corpus) total.merge(document_stats(doc, schema));
  return total;
}

}  // namespace mare
