#pragma once

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mare/document.hpp"

namespace mare {

// Converter for the published SmartData distribution (JSON export). The
// distribution annotates with character offsets over the raw text plus a
// token list carrying character spans; this maps every annotation to token
// indices. Kept in one quarantined module: the upstream format has shifted
// between corpus versions, so all format knowledge lives here and nowhere
// else. Field-name variants observed across exports are accepted.

struct ConvertStats {
  size_t documents = 0;
  size_t entities = 0;
  size_t relations = 0;
  size_t snapped_spans = 0;   // char offsets that did not align with a token boundary
  size_t skipped_entities = 0;
  size_t skipped_relations = 0;
};

namespace detail {

inline const nlohmann::json* first_field(const nlohmann::json& j,
                                         std::initializer_list<const char*> names) {
  for (const char* n : names)
    if (j.contains(n)) return &j[n];
  return nullptr;
}

inline std::optional<std::pair<long, long>> char_span(const nlohmann::json& j) {
  const nlohmann::json* s = &j;
  if (j.is_object() && j.contains("span")) s = &j["span"];
  if (!s->is_object() || !s->contains("start") || !s->contains("end")) return std::nullopt;
  if (!(*s)["start"].is_number_integer() || !(*s)["end"].is_number_integer()) return std::nullopt;
  return std::make_pair((*s)["start"].get<long>(), (*s)["end"].get<long>());
}

// Character offsets -> half-open token indices. Exact boundary matches are
// required; misaligned offsets snap outward to the covering token range and
// are counted.
class OffsetMap {
 public:
  OffsetMap(std::vector<long> starts, std::vector<long> ends)
      : starts_(std::move(starts)), ends_(std::move(ends)) {}

  std::optional<Span> to_tokens(long cstart, long cend, bool& snapped) const {
    int first = -1, last = -1;
    for (size_t i = 0; i < starts_.size(); ++i) {
      if (ends_[i] <= cstart) continue;
      if (starts_[i] >= cend) break;
      if (first < 0) first = static_cast<int>(i);
      last = static_cast<int>(i);
    }
    if (first < 0) return std::nullopt;
    snapped = starts_[static_cast<size_t>(first)] != cstart ||
              ends_[static_cast<size_t>(last)] != cend;
    return Span{first, last + 1};
  }

 private:
  std::vector<long> starts_, ends_;
};

}  // namespace detail

inline std::optional<Document> convert_smartdata_document(const nlohmann::json& j,
                                                          ConvertStats& stats) {
  if (!j.is_object()) return std::nullopt;
  const nlohmann::json* id = detail::first_field(j, {"id", "docId", "guid"});
  const nlohmann::json* tokens = detail::first_field(j, {"tokens"});
  if (id == nullptr || tokens == nullptr || !tokens->is_array() || tokens->empty())
    return std::nullopt;

  Document doc;
  doc.id = id->is_string() ? id->get<std::string>() : id->dump();
  const nlohmann::json* text = detail::first_field(j, {"text"});
  std::vector<long> starts, ends;
  for (const auto& jt : *tokens) {
    auto cs = detail::char_span(jt);
    if (!cs) return std::nullopt;  // token list without character spans
    starts.push_back(cs->first);
    ends.push_back(cs->second);
    if (text != nullptr && text->is_string()) {
      const std::string& raw = text->get_ref<const std::string&>();
      long lo = std::max(0l, cs->first), hi = std::min<long>(raw.size(), cs->second);
      doc.tokens.push_back(hi > lo ? raw.substr(static_cast<size_t>(lo),
                                                static_cast<size_t>(hi - lo))
                                   : std::string("<tok>"));
    } else {
      const nlohmann::json* surface = detail::first_field(jt, {"surface", "word", "form"});
      doc.tokens.push_back(surface != nullptr && surface->is_string()
                               ? surface->get<std::string>()
                               : "<tok>");
    }
  }
  detail::OffsetMap offsets(std::move(starts), std::move(ends));

  const nlohmann::json* source = detail::first_field(j, {"source", "origin"});
  if (source != nullptr && source->is_string()) doc.source = source->get<std::string>();

  const nlohmann::json* mentions = detail::first_field(j, {"conceptMentions", "entities", "mentions"});
  if (mentions != nullptr && mentions->is_array()) {
    for (const auto& jm : *mentions) {
      auto cs = detail::char_span(jm);
      const nlohmann::json* type = detail::first_field(jm, {"type", "entityType"});
      if (!cs || type == nullptr || !type->is_string()) {
        ++stats.skipped_entities;
        continue;
      }
      bool snapped = false;
      auto span = offsets.to_tokens(cs->first, cs->second, snapped);
      if (!span) {
        ++stats.skipped_entities;
        continue;
      }
      if (snapped) ++stats.snapped_spans;
      doc.entities.push_back(Entity{*span, type->get<std::string>()});
      ++stats.entities;
    }
  }

  const nlohmann::json* relations = detail::first_field(j, {"relationMentions", "relations"});
  if (relations != nullptr && relations->is_array()) {
    for (const auto& jr : *relations) {
      const nlohmann::json* label = detail::first_field(jr, {"name", "label", "type"});
      const nlohmann::json* args = detail::first_field(jr, {"args", "arguments", "attributes"});
      if (label == nullptr || !label->is_string() || args == nullptr || !args->is_array()) {
        ++stats.skipped_relations;
        continue;
      }
      Relation rel;
      rel.label = label->get<std::string>();
      bool ok = true;
      for (const auto& ja : *args) {
        const nlohmann::json* role = detail::first_field(ja, {"role"});
        const nlohmann::json* mention = detail::first_field(ja, {"conceptMention", "concept", "mention"});
        auto cs = mention != nullptr ? detail::char_span(*mention) : detail::char_span(ja);
        if (role == nullptr || !role->is_string() || !cs) {
          ok = false;
          break;
        }
        bool snapped = false;
        auto span = offsets.to_tokens(cs->first, cs->second, snapped);
        if (!span) {
          ok = false;
          break;
        }
        if (snapped) ++stats.snapped_spans;
        bool duplicate = false;
        for (const auto& existing : rel.attributes)
          if (existing.span == *span) duplicate = true;
        if (duplicate) continue;  // a span backs at most one attribute per relation
        rel.attributes.push_back(Attribute{*span, role->get<std::string>()});
      }
      if (!ok || rel.attributes.empty()) {
        ++stats.skipped_relations;
        continue;
      }
      doc.relations.push_back(std::move(rel));
      ++stats.relations;
    }
  }
  ++stats.documents;
  return doc;
}

// Accepts JSONL, a top-level array, or {"documents": [...]}.
inline std::vector<Document> convert_smartdata_file(const std::string& path, ConvertStats& stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("convert: cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<Document> docs;
  auto take = [&](const nlohmann::json& j) {
    auto doc = convert_smartdata_document(j, stats);
    if (doc) docs.push_back(std::move(*doc));
  };

  nlohmann::json whole = nlohmann::json::parse(content, nullptr, false);
  if (!whole.is_discarded()) {
    if (whole.is_array()) {
      for (const auto& j : whole) take(j);
      return docs;
    }
    if (whole.is_object() && whole.contains("documents") && whole["documents"].is_array()) {
      for (const auto& j : whole["documents"]) take(j);
      return docs;
    }
    if (whole.is_object()) {
      take(whole);
      return docs;
    }
  }
  // JSONL fallback.
  std::istringstream lines(content);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_discarded()) take(j);
  }
  return docs;
}

}  // namespace mare
