#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mare/document.hpp"

namespace mare {

// Malformed record or out-of-bounds span; carries the line number and, where
// known, the offending field path and document id.
struct ParseError : std::runtime_error {
  ParseError(size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_number(line) {}
  size_t line_number;
};

namespace detail {

inline int require_int(const nlohmann::json& j, const std::string& path, size_t line) {
  if (!j.is_number_integer()) throw ParseError(line, path + ": integer expected");
  return j.get<int>();
}

inline Span read_span(const nlohmann::json& j, const std::string& path, size_t line) {
  Span s;
  if (!j.contains("start")) throw ParseError(line, path + ".start: missing");
  if (!j.contains("end")) throw ParseError(line, path + ".end: missing");
  s.start = require_int(j["start"], path + ".start", line);
  s.end = require_int(j["end"], path + ".end", line);
  if (s.start < 0 || s.end <= s.start)
    throw ParseError(line, path + ": invalid span [" + std::to_string(s.start) + ", " +
                               std::to_string(s.end) + ")");
  return s;
}

}  // namespace detail

// One line-delimited record -> Document. Spans are validated against the
// token count here; schema conformance is validate_document's job.
inline Document parse_document_record(const std::string& text, size_t line = 0) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line, std::string("not a JSON record: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line, "document record must be an object");

  Document doc;
  if (!j.contains("id") || !j["id"].is_string()) throw ParseError(line, "id: string expected");
  doc.id = j["id"].get<std::string>();
  if (!j.contains("tokens") || !j["tokens"].is_array())
    throw ParseError(line, "tokens: array expected");
  for (size_t i = 0; i < j["tokens"].size(); ++i) {
    if (!j["tokens"][i].is_string())
      throw ParseError(line, "tokens[" + std::to_string(i) + "]: string expected");
    doc.tokens.push_back(j["tokens"][i].get<std::string>());
  }
  if (doc.tokens.empty())
    throw ParseError(line, "document '" + doc.id + "': tokens must be non-empty");
  const int n = doc.token_count();

  auto check_bounds = [&](const Span& s, const std::string& path) {
    if (s.end > n)
      throw ParseError(line, path + ": span [" + std::to_string(s.start) + ", " +
                                 std::to_string(s.end) + ") exceeds token count " +
                                 std::to_string(n) + " in document '" + doc.id + "'");
  };

  if (j.contains("entities")) {
    if (!j["entities"].is_array()) throw ParseError(line, "entities: array expected");
    for (size_t i = 0; i < j["entities"].size(); ++i) {
      const auto& je = j["entities"][i];
      std::string path = "entities[" + std::to_string(i) + "]";
      Entity e;
      e.span = detail::read_span(je, path, line);
      check_bounds(e.span, path);
      if (!je.contains("type") || !je["type"].is_string())
        throw ParseError(line, path + ".type: string expected");
      e.type = je["type"].get<std::string>();
      doc.entities.push_back(std::move(e));
    }
  }

  if (j.contains("relations")) {
    if (!j["relations"].is_array()) throw ParseError(line, "relations: array expected");
    for (size_t i = 0; i < j["relations"].size(); ++i) {
      const auto& jr = j["relations"][i];
      std::string rpath = "relations[" + std::to_string(i) + "]";
      Relation rel;
      if (!jr.contains("label") || !jr["label"].is_string())
        throw ParseError(line, rpath + ".label: string expected");
      rel.label = jr["label"].get<std::string>();
      if (!jr.contains("attributes") || !jr["attributes"].is_array() || jr["attributes"].empty())
        throw ParseError(line, rpath + ".attributes: non-empty array expected");
      std::set<Span> seen;
      for (size_t k = 0; k < jr["attributes"].size(); ++k) {
        const auto& ja = jr["attributes"][k];
        std::string apath = rpath + ".attributes[" + std::to_string(k) + "]";
        Attribute a;
        a.span = detail::read_span(ja, apath, line);
        check_bounds(a.span, apath);
        if (!ja.contains("role") || !ja["role"].is_string())
          throw ParseError(line, apath + ".role: string expected");
        a.role = ja["role"].get<std::string>();
        // A span contributes to at most one attribute per relation.
        if (!seen.insert(a.span).second)
          throw ParseError(line, apath + ": duplicate span within one relation in document '" +
                                     doc.id + "'");
        rel.attributes.push_back(std::move(a));
      }
      doc.relations.push_back(std::move(rel));
    }
  }

  if (j.contains("source")) {
    if (!j["source"].is_string()) throw ParseError(line, "source: string expected");
    doc.source = j["source"].get<std::string>();
  }
  return doc;
}

// Canonical single-line serialization; parse -> serialize round-trips
// byte-identically on canonical input.
inline std::string serialize_document(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  j["tokens"] = doc.tokens;
  j["entities"] = nlohmann::ordered_json::array();
  for (const auto& e : doc.entities) {
    nlohmann::ordered_json je;
    je["start"] = e.span.start;
    je["end"] = e.span.end;
    je["type"] = e.type;
    j["entities"].push_back(std::move(je));
  }
  j["relations"] = nlohmann::ordered_json::array();
  for (const auto& r : doc.relations) {
    nlohmann::ordered_json jr;
    jr["label"] = r.label;
    jr["attributes"] = nlohmann::ordered_json::array();
    for (const auto& a : r.attributes) {
      nlohmann::ordered_json ja;
      ja["start"] = a.span.start;
      ja["end"] = a.span.end;
      ja["role"] = a.role;
      jr["attributes"].push_back(std::move(ja));
    }
    j["relations"].push_back(std::move(jr));
  }
  if (!doc.source.empty()) j["source"] = doc.source;
  return j.dump();
}

inline std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    docs.push_back(parse_document_record(line, lineno));
  }
  return docs;
}

inline std::vector<Document> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("corpus: cannot open " + path);
  return parse_corpus(in);
}

inline void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) out << serialize_document(d) << '\n';
}

inline void write_corpus_file(const std::string& path, const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("corpus: cannot write " + path);
  write_corpus(out, docs);
}

}  // namespace mare
