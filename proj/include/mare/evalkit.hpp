#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "mare/document.hpp"
#include "mare/schema.hpp"
#include "mare/transforms.hpp"

namespace mare {

enum class Strategy { AR, Cl, MRE, CRE, BRE };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::AR: return "AR";
    case Strategy::Cl: return "Cl";
    case Strategy::MRE: return "MRE";
    case Strategy::CRE: return "CRE";
    case Strategy::BRE: return "BRE";
  }
  return "?";
}

inline Strategy strategy_from_name(const std::string& name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "ar") return Strategy::AR;
  if (n == "cl") return Strategy::Cl;
  if (n == "mre") return Strategy::MRE;
  if (n == "cre") return Strategy::CRE;
  if (n == "bre") return Strategy::BRE;
  throw std::runtime_error("unknown strategy '" + name + "'");
}

inline const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> order{Strategy::AR, Strategy::Cl, Strategy::MRE,
                                           Strategy::CRE, Strategy::BRE};
  return order;
}

// Micro counts with derived precision/recall/F1; zero denominators score 0.
struct PRF {
  size_t true_positives = 0;
  size_t predicted = 0;
  size_t gold = 0;

  double precision() const {
    return predicted == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(predicted);
  }
  double recall() const {
    return gold == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(gold);
  }
  double f1() const {
    double p = precision(), r = recall();
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  PRF& merge(const PRF& o) {
    true_positives += o.true_positives;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
};

// docId -> relations. Missing ids on either side score against emptiness.
using RelationsByDoc = std::map<std::string, std::vector<Relation>>;

namespace detail {

inline std::set<std::string> doc_universe(const RelationsByDoc& pred, const RelationsByDoc& gold) {
  std::set<std::string> ids;
  for (const auto& [id, _] : pred) ids.insert(id);
  for (const auto& [id, _] : gold) ids.insert(id);
  return ids;
}

inline const std::vector<Relation>& relations_or_empty(const RelationsByDoc& m,
                                                       const std::string& id) {
  static const std::vector<Relation> empty;
  auto it = m.find(id);
  return it == m.end() ? empty : it->second;
}

// (span, role) pairs restricted to mandatory roles of the relation's label.
inline std::set<std::pair<Span, std::string>> mandatory_set(const Relation& rel,
                                                            const Schema& schema) {
  std::set<std::pair<Span, std::string>> out;
  int li = schema.label_index(rel.label);
  for (const auto& a : rel.attributes) {
    if (li < 0) continue;
    int role_idx = schema.role_index(li, a.role);
    if (role_idx >= 0 && schema.label(li).roles[static_cast<size_t>(role_idx)].mandatory)
      out.insert({a.span, a.role});
  }
  return out;
}

inline std::set<std::pair<Span, std::string>> full_set(const Relation& rel) {
  std::set<std::pair<Span, std::string>> out;
  for (const auto& a : rel.attributes) out.insert({a.span, a.role});
  return out;
}

// Deterministic iteration order for greedy matching: label, then first
// attribute span.
inline std::vector<size_t> match_order(const std::vector<Relation>& rels, const Schema& schema) {
  std::vector<size_t> order(rels.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    int la = schema.label_index(rels[a].label), lb = schema.label_index(rels[b].label);
    Span sa = rels[a].attributes.empty() ? Span{0, 0} : rels[a].attributes.front().span;
    Span sb = rels[b].attributes.empty() ? Span{0, 0} : rels[b].attributes.front().span;
    return std::tie(la, sa.start, sa.end) < std::tie(lb, sb.start, sb.end);
  });
  return order;
}

// Greedy one-to-one matching under a match predicate; optimal for the
// equality-style criteria used here.
template <typename MatchFn>
PRF match_relations(const std::vector<Relation>& pred, const std::vector<Relation>& gold,
                    const Schema& schema, MatchFn&& matches) {
  PRF prf;
  prf.predicted = pred.size();
  prf.gold = gold.size();
  std::vector<bool> used(gold.size(), false);
  for (size_t pi : match_order(pred, schema)) {
    for (size_t gi : match_order(gold, schema)) {
      if (used[gi]) continue;
      if (matches(pred[pi], gold[gi])) {
        used[gi] = true;
        prf.true_positives += 1;
        break;
      }
    }
  }
  return prf;
}

}  // namespace detail

// Attribute recognition: sets of (span, label, role) triples, grouping
// ignored.
inline PRF score_ar(const RelationsByDoc& pred, const RelationsByDoc& gold) {
  PRF total;
  for (const auto& id : detail::doc_universe(pred, gold)) {
    std::set<std::tuple<Span, std::string, std::string>> p, g;
    for (const auto& rel : detail::relations_or_empty(pred, id))
      for (const auto& a : rel.attributes) p.insert({a.span, rel.label, a.role});
    for (const auto& rel : detail::relations_or_empty(gold, id))
      for (const auto& a : rel.attributes) g.insert({a.span, rel.label, a.role});
    PRF doc;
    doc.predicted = p.size();
    doc.gold = g.size();
    for (const auto& t : p)
      if (g.count(t)) doc.true_positives += 1;
    total.merge(doc);
  }
  return total;
}

// Classification: one-to-one matching on label equality.
inline PRF score_cl(const RelationsByDoc& pred, const RelationsByDoc& gold, const Schema& schema) {
  PRF total;
  for (const auto& id : detail::doc_universe(pred, gold)) {
    total.merge(detail::match_relations(
        detail::relations_or_empty(pred, id), detail::relations_or_empty(gold, id), schema,
        [](const Relation& p, const Relation& g) { return p.label == g.label; }));
  }
  return total;
}

// Mandatory relation extraction: label and the exact set of mandatory-role
// (span, role) pairs; optional attributes are ignored.
inline PRF score_mre(const RelationsByDoc& pred, const RelationsByDoc& gold,
                     const Schema& schema) {
  PRF total;
  for (const auto& id : detail::doc_universe(pred, gold)) {
    total.merge(detail::match_relations(
        detail::relations_or_empty(pred, id), detail::relations_or_empty(gold, id), schema,
        [&](const Relation& p, const Relation& g) {
          return p.label == g.label &&
                 detail::mandatory_set(p, schema) == detail::mandatory_set(g, schema);
        }));
  }
  return total;
}

// Complete relation extraction: label and the full attribute set.
inline PRF score_cre(const RelationsByDoc& pred, const RelationsByDoc& gold,
                     const Schema& schema) {
  PRF total;
  for (const auto& id : detail::doc_universe(pred, gold)) {
    total.merge(detail::match_relations(
        detail::relations_or_empty(pred, id), detail::relations_or_empty(gold, id), schema,
        [](const Relation& p, const Relation& g) {
          return p.label == g.label && detail::full_set(p) == detail::full_set(g);
        }));
  }
  return total;
}

// Binary relation extraction: MRE restricted to the binary subset of the
// gold documents (both sides restricted).
inline PRF score_bre(const RelationsByDoc& pred, const std::vector<Document>& gold_docs,
                     const Schema& schema) {
  RelationsByDoc pred_subset, gold_subset;
  for (const auto& doc : binary_subset(gold_docs, schema)) {
    gold_subset[doc.id] = doc.relations;
    auto it = pred.find(doc.id);
    if (it != pred.end()) pred_subset[doc.id] = it->second;
  }
  return score_mre(pred_subset, gold_subset, schema);
}

// Removes attributes whose role is the designated trigger role of their
// relation's label; relations left empty are dropped, the rest (including
// single-attribute leftovers) are kept.
inline RelationsByDoc strip_triggers(const RelationsByDoc& by_doc, const Schema& schema) {
  RelationsByDoc out;
  for (const auto& [id, rels] : by_doc) {
    std::vector<Relation> kept;
    for (const auto& rel : rels) {
      int li = schema.label_index(rel.label);
      const RoleDef* trig = li >= 0 ? schema.trigger_role(li) : nullptr;
      Relation r;
      r.label = rel.label;
      for (const auto& a : rel.attributes)
        if (trig == nullptr || a.role != trig->name) r.attributes.push_back(a);
      if (!r.attributes.empty()) kept.push_back(std::move(r));
    }
    out[id] = std::move(kept);
  }
  return out;
}

inline RelationsByDoc gold_relations(const std::vector<Document>& docs) {
  RelationsByDoc out;
  for (const auto& d : docs) out[d.id] = d.relations;
  return out;
}

struct MetricsReport {
  std::vector<std::pair<Strategy, PRF>> scores;  // fixed AR, Cl, MRE, CRE, BRE order
  std::map<std::string, std::vector<std::pair<Strategy, PRF>>> per_label;
  bool exclude_triggers = false;

  const PRF* find(Strategy s) const {
    for (const auto& [st, prf] : scores)
      if (st == s) return &prf;
    return nullptr;
  }
};

namespace detail {

inline RelationsByDoc filter_label(const RelationsByDoc& by_doc, const std::string& label) {
  RelationsByDoc out;
  for (const auto& [id, rels] : by_doc) {
    std::vector<Relation> kept;
    for (const auto& r : rels)
      if (r.label == label) kept.push_back(r);
    out[id] = std::move(kept);
  }
  return out;
}

inline std::vector<Document> filter_label_docs(const std::vector<Document>& docs,
                                               const std::string& label) {
  std::vector<Document> out;
  for (const auto& d : docs) {
    Document copy = d;
    copy.relations.clear();
    for (const auto& r : d.relations)
      if (r.label == label) copy.relations.push_back(r);
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace detail

// Runs the requested strategies over assembled predictions and gold
// documents, optionally with trigger-excluded scoring.
inline MetricsReport evaluate(const RelationsByDoc& pred_in, const std::vector<Document>& gold_docs,
                              const Schema& schema, std::vector<Strategy> strategies,
                              bool exclude_triggers = false, bool with_per_label = false) {
  // Keep the fixed AR, Cl, MRE, CRE, BRE presentation order.
  std::vector<Strategy> ordered;
  for (Strategy s : all_strategies())
    if (std::find(strategies.begin(), strategies.end(), s) != strategies.end())
      ordered.push_back(s);

  std::vector<Document> gold_eval = gold_docs;
  RelationsByDoc pred = pred_in;
  if (exclude_triggers) {
    pred = strip_triggers(pred, schema);
    for (auto& doc : gold_eval) {
      RelationsByDoc one;
      one[doc.id] = doc.relations;
      doc.relations = strip_triggers(one, schema)[doc.id];
    }
  }
  RelationsByDoc gold = gold_relations(gold_eval);

  // Binary-subset membership is a property of the original corpus; trigger
  // exclusion must not change which documents qualify.
  auto bre = [&](const RelationsByDoc& p, const RelationsByDoc& g,
                 const std::vector<Document>& original) -> PRF {
    RelationsByDoc p2, g2;
    for (const auto& doc : binary_subset(original, schema)) {
      auto git = g.find(doc.id);
      g2[doc.id] = git == g.end() ? std::vector<Relation>{} : git->second;
      auto pit = p.find(doc.id);
      if (pit != p.end()) p2[doc.id] = pit->second;
    }
    return score_mre(p2, g2, schema);
  };

  auto run = [&](Strategy s, const RelationsByDoc& p, const RelationsByDoc& g,
                 const std::vector<Document>& original) -> PRF {
    switch (s) {
      case Strategy::AR: return score_ar(p, g);
      case Strategy::Cl: return score_cl(p, g, schema);
      case Strategy::MRE: return score_mre(p, g, schema);
      case Strategy::CRE: return score_cre(p, g, schema);
      case Strategy::BRE: return bre(p, g, original);
    }
    return {};
  };

  MetricsReport report;
  report.exclude_triggers = exclude_triggers;
  for (Strategy s : ordered) report.scores.push_back({s, run(s, pred, gold, gold_docs)});
  if (with_per_label) {
    for (const auto& l : schema.labels()) {
      auto pred_l = detail::filter_label(pred, l.name);
      auto gold_l = gold_relations(detail::filter_label_docs(gold_eval, l.name));
      auto original_l = detail::filter_label_docs(gold_docs, l.name);
      std::vector<std::pair<Strategy, PRF>> rows;
      for (Strategy s : ordered) rows.push_back({s, run(s, pred_l, gold_l, original_l)});
      report.per_label[l.name] = std::move(rows);
    }
  }
  return report;
}

inline double round4(double x) { return std::round(x * 10000.0) / 10000.0; }

inline nlohmann::ordered_json report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["excludeTriggers"] = report.exclude_triggers;
  nlohmann::ordered_json strategies = nlohmann::ordered_json::array();
  for (const auto& [s, _] : report.scores) strategies.push_back(strategy_name(s));
  j["strategies"] = std::move(strategies);
  auto prf_json = [](const PRF& prf) {
    nlohmann::ordered_json jp;
    jp["truePositives"] = prf.true_positives;
    jp["predictedCount"] = prf.predicted;
    jp["goldCount"] = prf.gold;
    jp["precision"] = round4(prf.precision());
    jp["recall"] = round4(prf.recall());
    jp["f1"] = round4(prf.f1());
    return jp;
  };
  nlohmann::ordered_json scores = nlohmann::ordered_json::object();
  for (const auto& [s, prf] : report.scores) scores[strategy_name(s)] = prf_json(prf);
  j["scores"] = std::move(scores);
  if (!report.per_label.empty()) {
    nlohmann::ordered_json per_label = nlohmann::ordered_json::object();
    for (const auto& [label, rows] : report.per_label) {
      nlohmann::ordered_json jl = nlohmann::ordered_json::object();
      for (const auto& [s, prf] : rows) jl[strategy_name(s)] = prf_json(prf);
      per_label[label] = std::move(jl);
    }
    j["perLabel"] = std::move(per_label);
  }
  return j;
}

// Human-readable grid in the familiar benchmark shape: one row block per
// model with F1/P/R lines, strategies as columns.
inline std::string render_report_table(const MetricsReport& report,
                                       const std::string& model_name = "model") {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-16s%-4s", "Model", "");
  out += buf;
  for (const auto& [s, _] : report.scores) {
    std::snprintf(buf, sizeof(buf), "%10s", strategy_name(s));
    out += buf;
  }
  if (report.exclude_triggers) out += "   (triggers excluded)";
  out += '\n';
  const char* rows[3] = {"F1", "P", "R"};
  for (int r = 0; r < 3; ++r) {
    std::snprintf(buf, sizeof(buf), "%-16s%-4s", r == 0 ? model_name.c_str() : "", rows[r]);
    out += buf;
    for (const auto& [s, prf] : report.scores) {
      double v = r == 0 ? prf.f1() : (r == 1 ? prf.precision() : prf.recall());
      std::snprintf(buf, sizeof(buf), "%10.4f", round4(v));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace mare
