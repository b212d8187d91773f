#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mare/assembler.hpp"
#include "mare/evalkit.hpp"
#include "mare/span_labeler.hpp"

namespace mare {

// Assembled prediction record, the common format both approaches emit and
// evalkit consumes:
//   {"docId": ..., "relations": [{"label", "mandatoryComplete",
//     "attributes": [{"start", "end", "role", "completed"}]}]}

inline nlohmann::ordered_json assembled_to_json(const std::string& doc_id,
                                                const std::vector<AssembledRelation>& relations) {
  nlohmann::ordered_json j;
  j["docId"] = doc_id;
  j["relations"] = nlohmann::ordered_json::array();
  for (const auto& rel : relations) {
    nlohmann::ordered_json jr;
    jr["label"] = rel.label;
    jr["mandatoryComplete"] = rel.mandatory_complete;
    jr["attributes"] = nlohmann::ordered_json::array();
    for (const auto& a : rel.attributes) {
      nlohmann::ordered_json ja;
      ja["start"] = a.attribute.span.start;
      ja["end"] = a.attribute.span.end;
      ja["role"] = a.attribute.role;
      ja["completed"] = a.completed;
      jr["attributes"].push_back(std::move(ja));
    }
    j["relations"].push_back(std::move(jr));
  }
  return j;
}

inline void write_predictions(std::ostream& out,
                              const std::map<std::string, std::vector<AssembledRelation>>& by_doc) {
  for (const auto& [id, rels] : by_doc) out << assembled_to_json(id, rels).dump() << '\n';
}

inline void write_predictions_file(
    const std::string& path,
    const std::map<std::string, std::vector<AssembledRelation>>& by_doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("predictions: cannot write " + path);
  write_predictions(out, by_doc);
}

inline RelationsByDoc read_predictions(std::istream& in) {
  RelationsByDoc out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("predictions line " + std::to_string(lineno) + ": " + e.what());
    }
    std::string id = j.at("docId").get<std::string>();
    std::vector<Relation> rels;
    for (const auto& jr : j.at("relations")) {
      Relation r;
      r.label = jr.at("label").get<std::string>();
      for (const auto& ja : jr.at("attributes"))
        r.attributes.push_back(Attribute{
            Span{ja.at("start").get<int>(), ja.at("end").get<int>()},
            ja.at("role").get<std::string>()});
      rels.push_back(std::move(r));
    }
    out[id] = std::move(rels);
  }
  return out;
}

inline RelationsByDoc read_predictions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("predictions: cannot open " + path);
  return read_predictions(in);
}

// Raw span-probability dump:
//   {"docId": ..., "spans": [{"start", "end", "label", "role", "prob"}]}
inline void write_span_dump(std::ostream& out, const std::string& doc_id,
                            const std::vector<SpanPrediction>& spans) {
  nlohmann::ordered_json j;
  j["docId"] = doc_id;
  j["spans"] = nlohmann::ordered_json::array();
  for (const auto& s : spans) {
    nlohmann::ordered_json js;
    js["start"] = s.span.start;
    js["end"] = s.span.end;
    js["label"] = s.label;
    js["role"] = s.role;
    js["prob"] = round4(s.probability);
    j["spans"].push_back(std::move(js));
  }
  out << j.dump() << '\n';
}

}  // namespace mare
