#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mare/rng.hpp"

namespace mare {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RoleDef {
  std::string name;
  bool mandatory = false;
  bool trigger = false;
  std::vector<std::string> entity_types;  // empty = no compatibility constraint known
};

struct LabelDef {
  std::string name;
  std::vector<RoleDef> roles;
  // Permits a label with a single mandatory role; labels normally need two.
  bool single_mandatory = false;
};

// Relation inventory: ordered labels, per-label ordered role sets with
// mandatory/trigger flags and role -> entity-type compatibility.
class Schema {
 public:
  Schema() = default;

  explicit Schema(std::vector<LabelDef> labels) : labels_(std::move(labels)) { check(); }

  const std::vector<LabelDef>& labels() const { return labels_; }

  int label_index(std::string_view name) const {
    for (size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i].name == name) return static_cast<int>(i);
    return -1;
  }

  const LabelDef& label(int index) const { return labels_.at(static_cast<size_t>(index)); }

  int role_index(int label_idx, std::string_view role) const {
    const auto& roles = label(label_idx).roles;
    for (size_t i = 0; i < roles.size(); ++i)
      if (roles[i].name == role) return static_cast<int>(i);
    return -1;
  }

  const RoleDef* find_role(std::string_view label_name, std::string_view role_name) const {
    int li = label_index(label_name);
    if (li < 0) return nullptr;
    int ri = role_index(li, role_name);
    if (ri < 0) return nullptr;
    return &labels_[static_cast<size_t>(li)].roles[static_cast<size_t>(ri)];
  }

  // The designated trigger role of a label, if any.
  const RoleDef* trigger_role(int label_idx) const {
    for (const auto& r : label(label_idx).roles)
      if (r.trigger) return &r;
    return nullptr;
  }

  std::vector<std::string> mandatory_roles(int label_idx) const {
    std::vector<std::string> out;
    for (const auto& r : label(label_idx).roles)
      if (r.mandatory) out.push_back(r.name);
    return out;
  }

  // Sum over labels of |A_l|.
  size_t total_roles() const {
    size_t n = 0;
    for (const auto& l : labels_) n += l.roles.size();
    return n;
  }

  // An entity type is compatible with a role when the role's entityTypes
  // list it; a role with no entityTypes accepts nothing under this query.
  bool type_compatible(const RoleDef& role, std::string_view entity_type) const {
    return std::find(role.entity_types.begin(), role.entity_types.end(), entity_type) !=
           role.entity_types.end();
  }

  // Role-to-role compatibility used by attribute completion: entity-type
  // intersection when both sides declare types, role-name equality otherwise.
  bool roles_compatible(const RoleDef& wanted, const RoleDef& candidate) const {
    if (!wanted.entity_types.empty() && !candidate.entity_types.empty()) {
      for (const auto& t : candidate.entity_types)
        if (type_compatible(wanted, t)) return true;
      return false;
    }
    return wanted.name == candidate.name;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["labels"] = nlohmann::ordered_json::array();
    for (const auto& l : labels_) {
      nlohmann::ordered_json jl;
      jl["name"] = l.name;
      if (l.single_mandatory) jl["singleMandatory"] = true;
      jl["roles"] = nlohmann::ordered_json::array();
      for (const auto& r : l.roles) {
        nlohmann::ordered_json jr;
        jr["name"] = r.name;
        jr["mandatory"] = r.mandatory;
        jr["trigger"] = r.trigger;
        jr["entityTypes"] = r.entity_types;
        jl["roles"].push_back(std::move(jr));
      }
      j["labels"].push_back(std::move(jl));
    }
    return j;
  }

  static Schema from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("labels") || !j["labels"].is_array())
      throw SchemaError("schema: top-level object with a 'labels' array expected");
    std::vector<LabelDef> labels;
    for (const auto& jl : j["labels"]) {
      LabelDef l;
      l.name = jl.at("name").get<std::string>();
      l.single_mandatory = jl.value("singleMandatory", false);
      if (!jl.contains("roles") || !jl["roles"].is_array() || jl["roles"].empty())
        throw SchemaError("schema: label '" + l.name + "' has no roles");
      for (const auto& jr : jl["roles"]) {
        RoleDef r;
        r.name = jr.at("name").get<std::string>();
        r.mandatory = jr.value("mandatory", false);
        r.trigger = jr.value("trigger", false);
        if (jr.contains("entityTypes"))
          r.entity_types = jr["entityTypes"].get<std::vector<std::string>>();
        l.roles.push_back(std::move(r));
      }
      labels.push_back(std::move(l));
    }
    return Schema(std::move(labels));
  }

  static Schema load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("schema: cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("schema: " + path + ": " + e.what());
    }
    return from_json(j);
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw SchemaError("schema: cannot write " + path);
    out << to_json().dump(2) << '\n';
  }

  // Stable content hash; model artifacts carry it so predict can refuse a
  // mismatched schema.
  std::string fingerprint() const {
    uint64_t h = fnv1a64(to_json().dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
  }

 private:
  void check() const {
    std::set<std::string> label_names;
    for (const auto& l : labels_) {
      if (l.name.empty()) throw SchemaError("schema: empty label name");
      if (l.name.find('-') != std::string::npos)
        throw SchemaError("schema: label '" + l.name + "' contains '-', reserved for tag rendering");
      if (!label_names.insert(l.name).second)
        throw SchemaError("schema: duplicate label '" + l.name + "'");
      std::set<std::string> role_names;
      size_t mandatory = 0, triggers = 0;
      for (const auto& r : l.roles) {
        if (r.name.empty()) throw SchemaError("schema: empty role name in label '" + l.name + "'");
        if (r.name.find('-') != std::string::npos)
          throw SchemaError("schema: role '" + r.name + "' contains '-', reserved for tag rendering");
        if (!role_names.insert(r.name).second)
          throw SchemaError("schema: duplicate role '" + r.name + "' in label '" + l.name + "'");
        if (r.mandatory) ++mandatory;
        if (r.trigger) ++triggers;
      }
      if (triggers > 1)
        throw SchemaError("schema: label '" + l.name + "' designates more than one trigger role");
      size_t required = l.single_mandatory ? 1 : 2;
      if (mandatory < required) {
        std::ostringstream msg;
        msg << "schema: label '" << l.name << "' has " << mandatory << " mandatory role(s), needs "
            << required << (l.single_mandatory ? " (singleMandatory)" : "");
        throw SchemaError(msg.str());
      }
    }
  }

  std::vector<LabelDef> labels_;
};

}  // namespace mare
