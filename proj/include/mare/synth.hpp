#pragma once

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mare/document.hpp"
#include "mare/rng.hpp"
#include "mare/schema.hpp"

namespace mare {

// Deterministic corpus generator. Every role owns a private vocabulary, so
// each attribute is recoverable from its surface tokens alone; that is what
// makes the generated data learnable by the linear desk-scale models and the
// assembly ground truth exact. Knobs inject the phenomena the toolkit has to
// survive: optional attributes, same-label relation pairs with wide gaps,
// spans shared across relations, and (off by default) ambiguous same-label
// pairs too close to ever split.

struct SynthRolePool {
  std::string role;
  bool mandatory = false;
  bool trigger = false;
  std::vector<std::string> entity_types;
  std::vector<std::vector<std::string>> entries;  // 1- or 2-token surface forms
};

struct SynthTemplate {
  std::string label;
  std::vector<SynthRolePool> roles;
  std::string share_role;  // mandatory role eligible for cross-relation sharing
};

struct SynthConfig {
  int document_count = 1000;
  double optional_attribute_probability = 0.5;
  double multi_relation_probability = 0.3;
  double same_label_pair_probability = 0.2;
  double shared_span_probability = 0.2;
  double ambiguous_pair_probability = 0.0;  // same-label pair too close to split
  int wide_gap = 25;   // filler run between splittable same-label pairs
  int close_gap = 8;   // filler run inside ambiguous pairs; keep <= max relation width
  uint64_t seed = 1;
  std::vector<SynthTemplate> templates;  // empty -> default traffic templates
};

struct SynthResult {
  std::vector<Document> documents;
  Schema schema;
  std::set<std::string> ambiguous_doc_ids;
};

inline std::vector<SynthTemplate> default_synth_templates() {
  auto pool = [](std::string role, bool mandatory, bool trigger,
                 std::vector<std::string> entity_types,
                 std::vector<std::vector<std::string>> entries) {
    SynthRolePool p;
    p.role = std::move(role);
    p.mandatory = mandatory;
    p.trigger = trigger;
    p.entity_types = std::move(entity_types);
    p.entries = std::move(entries);
    return p;
  };
  const std::vector<std::string> loc_types{"loc_city", "loc_street"};

  // Mandatory-role surface forms are single tokens: a multi-token span's
  // pooled logit is a convex combination of its tokens' logits, so a linear
  // head cannot push a phrase span above threshold while keeping both of its
  // sub-spans below it. Multi-token phrases live in optional roles, which
  // exercise b-i tag runs without gating mandatory-relation extraction.
  std::vector<SynthTemplate> templates;
  {
    SynthTemplate t;
    t.label = "Accident";
    t.share_role = "location";
    t.roles.push_back(pool("trigger", true, true, {"trigger_phrase"},
                           {{"unfall"}, {"kollision"}, {"karambolage"}, {"zusammenstoss"},
                            {"auffahrunfall"}, {"geisterfahrer"}, {"blechschaden"}}));
    t.roles.push_back(pool("location", true, false, loc_types,
                           {{"kreuzberg"}, {"nippes"}, {"ehrenfeld"}, {"deutz"}, {"kalk"},
                            {"porz"}, {"suelz"}}));
    t.roles.push_back(pool("cause", false, false, {"cause_phrase"},
                           {{"glaette"}, {"nebel"}, {"aquaplaning"}, {"wildwechsel"},
                            {"reifenplatzer"}, {"dichter", "schneefall"}, {"starker", "regen"}}));
    templates.push_back(std::move(t));
  }
  {
    SynthTemplate t;
    t.label = "Obstruction";
    t.share_role = "location";
    t.roles.push_back(pool("trigger", true, true, {"trigger_phrase"},
                           {{"sperrung"}, {"vollsperrung"}, {"gesperrt"}, {"blockiert"},
                            {"baustelle"}, {"fahrbahnverengung"}, {"spursperrung"}}));
    t.roles.push_back(pool("location", true, false, loc_types,
                           {{"rodenkirchen"}, {"lindenthal"}, {"chorweiler"}, {"muelheim"},
                            {"zollstock"}, {"severinsbruecke"}, {"zoobruecke"}}));
    t.roles.push_back(pool("endloc", false, false, loc_types,
                           {{"troisdorf"}, {"siegburg"}, {"hennef"}, {"lohmar"}, {"overath"},
                            {"bergisch", "gladbach"}, {"bad", "honnef"}}));
    templates.push_back(std::move(t));
  }
  {
    SynthTemplate t;
    t.label = "TrafficJam";
    t.share_role = "location";
    t.roles.push_back(pool("trigger", true, true, {"trigger_phrase"},
                           {{"stau"}, {"stockung"}, {"blechlawine"}, {"rueckstau"},
                            {"stillstand"}, {"verkehrsstockung"}, {"stopandgo"}}));
    t.roles.push_back(pool("location", true, false, loc_types,
                           {{"wesseling"}, {"huerth"}, {"frechen"}, {"pulheim"}, {"dormagen"},
                            {"leverkusen"}, {"bergheim"}}));
    t.roles.push_back(pool("length", false, false, {"jam_length"},
                           {{"dreikm"}, {"fuenfkm"}, {"siebenkm"}, {"zehnkm"}, {"zwoelfkm"},
                            {"acht", "km"}, {"vier", "km"}}));
    templates.push_back(std::move(t));
  }
  return templates;
}

inline Schema synth_schema(const std::vector<SynthTemplate>& templates) {
  std::vector<LabelDef> labels;
  for (const auto& t : templates) {
    LabelDef l;
    l.name = t.label;
    for (const auto& r : t.roles) {
      RoleDef role;
      role.name = r.role;
      role.mandatory = r.mandatory;
      role.trigger = r.trigger;
      role.entity_types = r.entity_types;
      l.roles.push_back(std::move(role));
    }
    labels.push_back(std::move(l));
  }
  return Schema(std::move(labels));
}

namespace detail {

inline const std::vector<std::string>& synth_filler() {
  static const std::vector<std::string> filler{
      "der",      "die",     "das",    "und",      "auf",     "im",     "bei",
      "nach",     "vor",     "wegen",  "heute",    "morgen",  "aktuell", "meldung",
      "verkehr",  "richtung", "zwischen", "bitte",  "umfahren", "achtung", "hinweis",
      "gegen",    "uhr",     "mittag", "abend"};
  return filler;
}

struct SynthEmit {
  Relation relation;
  std::vector<Entity> entities;
};

inline void push_filler(std::vector<std::string>& tokens, Rng& rng, int count) {
  const auto& filler = synth_filler();
  for (int i = 0; i < count; ++i)
    tokens.push_back(filler[static_cast<size_t>(rng.next_below(filler.size()))]);
}

// Appends one relation instance to the token stream. share_last moves the
// shareable role to the segment end (keeps it nearest to a following
// relation); reuse_span skips token emission for that role and reuses the
// given span instead.
inline SynthEmit emit_relation(std::vector<std::string>& tokens, const SynthTemplate& tmpl,
                               const SynthConfig& config, Rng& rng, bool share_last,
                               const Span* reuse_span) {
  std::vector<const SynthRolePool*> order;
  const SynthRolePool* shared = nullptr;
  for (const auto& r : tmpl.roles) {
    if (!r.mandatory && !rng.next_bernoulli(config.optional_attribute_probability)) continue;
    if (share_last && r.role == tmpl.share_role) {
      shared = &r;
      continue;
    }
    order.push_back(&r);
  }
  if (shared != nullptr) order.push_back(shared);

  SynthEmit out;
  out.relation.label = tmpl.label;
  for (const SynthRolePool* r : order) {
    if (reuse_span != nullptr && r->role == tmpl.share_role) {
      out.relation.attributes.push_back(Attribute{*reuse_span, r->role});
      continue;
    }
    push_filler(tokens, rng, 1 + static_cast<int>(rng.next_below(3)));
    const auto& entry = r->entries[static_cast<size_t>(rng.next_below(r->entries.size()))];
    Span span{static_cast<int>(tokens.size()), static_cast<int>(tokens.size() + entry.size())};
    for (const auto& w : entry) tokens.push_back(w);
    out.relation.attributes.push_back(Attribute{span, r->role});
    out.entities.push_back(
        Entity{span, r->entity_types[static_cast<size_t>(rng.next_below(r->entity_types.size()))]});
  }
  return out;
}

}  // namespace detail

inline SynthResult generate_corpus(const SynthConfig& config) {
  if (config.document_count < 1) throw std::invalid_argument("synth: documentCount must be >= 1");
  SynthResult result;
  const std::vector<SynthTemplate> templates =
      config.templates.empty() ? default_synth_templates() : config.templates;
  result.schema = synth_schema(templates);
  Rng rng(config.seed);
  const char* sources[3] = {"news", "rss", "twitter"};

  for (int di = 0; di < config.document_count; ++di) {
    Document doc;
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%06d", di);
    doc.id = idbuf;
    doc.source = sources[rng.next_below(3)];

    enum class Kind { Single, SharedSpan, WidePair, ClosePair, Multi };
    const bool can_share =
        templates.size() >= 2 &&
        std::all_of(templates.begin(), templates.end(),
                    [](const SynthTemplate& t) { return !t.share_role.empty(); });
    Kind kind = Kind::Single;
    if (rng.next_bernoulli(config.ambiguous_pair_probability))
      kind = Kind::ClosePair;
    else if (can_share && rng.next_bernoulli(config.shared_span_probability))
      kind = Kind::SharedSpan;
    else if (rng.next_bernoulli(config.same_label_pair_probability))
      kind = Kind::WidePair;
    else if (templates.size() >= 2 && rng.next_bernoulli(config.multi_relation_probability))
      kind = Kind::Multi;

    const size_t first = rng.next_below(templates.size());
    detail::push_filler(doc.tokens, rng, 1 + static_cast<int>(rng.next_below(2)));

    auto append = [&](const detail::SynthEmit& e) {
      doc.relations.push_back(e.relation);
      for (const auto& ent : e.entities) doc.entities.push_back(ent);
    };

    switch (kind) {
      case Kind::Single: {
        append(detail::emit_relation(doc.tokens, templates[first], config, rng, false, nullptr));
        break;
      }
      case Kind::SharedSpan: {
        auto e1 =
            detail::emit_relation(doc.tokens, templates[first], config, rng, true, nullptr);
        append(e1);
        Span shared{0, 0};
        for (const auto& a : e1.relation.attributes)
          if (a.role == templates[first].share_role) shared = a.span;
        size_t second = rng.next_below(templates.size() - 1);
        if (second >= first) ++second;
        detail::push_filler(doc.tokens, rng, 2 + static_cast<int>(rng.next_below(2)));
        append(detail::emit_relation(doc.tokens, templates[second], config, rng, false, &shared));
        break;
      }
      case Kind::WidePair:
      case Kind::ClosePair: {
        append(detail::emit_relation(doc.tokens, templates[first], config, rng, false, nullptr));
        int gap = kind == Kind::WidePair
                      ? config.wide_gap + static_cast<int>(rng.next_below(5))
                      : 3 + static_cast<int>(rng.next_below(
                                static_cast<uint64_t>(std::max(1, config.close_gap - 2))));
        detail::push_filler(doc.tokens, rng, gap);
        append(detail::emit_relation(doc.tokens, templates[first], config, rng, false, nullptr));
        if (kind == Kind::ClosePair) result.ambiguous_doc_ids.insert(doc.id);
        break;
      }
      case Kind::Multi: {
        append(detail::emit_relation(doc.tokens, templates[first], config, rng, false, nullptr));
        size_t second = rng.next_below(templates.size() - 1);
        if (second >= first) ++second;
        detail::push_filler(doc.tokens, rng, 3 + static_cast<int>(rng.next_below(4)));
        append(detail::emit_relation(doc.tokens, templates[second], config, rng, false, nullptr));
        break;
      }
    }

    detail::push_filler(doc.tokens, rng, 1 + static_cast<int>(rng.next_below(2)));
    if (rng.next_bernoulli(0.4)) {
      // Distractor entity; type 'misc' is compatible with no role.
      int pos = static_cast<int>(rng.next_below(static_cast<uint64_t>(doc.tokens.size())));
      doc.entities.push_back(Entity{Span{pos, pos + 1}, "misc"});
    }
    result.documents.push_back(std::move(doc));
  }
  return result;
}

}  // namespace mare
