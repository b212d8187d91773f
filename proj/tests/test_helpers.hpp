#pragma once

#include <string>
#include <vector>

#include "mare/document.hpp"
#include "mare/schema.hpp"

namespace mare::testing {

// Two-label toy schema used across suites: shared location entity types make
// the roles completion-compatible across labels.
inline Schema toy_schema() {
  LabelDef accident;
  accident.name = "Accident";
  accident.roles = {
      RoleDef{"Trigger", true, true, {"TriggerPhrase"}},
      RoleDef{"Location", true, false, {"LocationCity", "LocationStreet"}},
      RoleDef{"Delay", false, false, {"Duration"}},
  };
  LabelDef obstruction;
  obstruction.name = "Obstruction";
  obstruction.roles = {
      RoleDef{"Trigger", true, true, {"TriggerPhrase"}},
      RoleDef{"Location", true, false, {"LocationCity", "LocationStreet"}},
      RoleDef{"EndLoc", false, false, {"LocationCity", "LocationStreet"}},
  };
  return Schema({accident, obstruction});
}

inline Document make_doc(std::string id, std::vector<std::string> tokens,
                         std::vector<Relation> relations = {}, std::vector<Entity> entities = {}) {
  Document d;
  d.id = std::move(id);
  d.tokens = std::move(tokens);
  d.relations = std::move(relations);
  d.entities = std::move(entities);
  return d;
}

inline std::vector<std::string> filler_tokens(size_t n, const std::string& word = "x") {
  return std::vector<std::string>(n, word);
}

}  // namespace mare::testing
