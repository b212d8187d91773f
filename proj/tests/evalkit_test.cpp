#include <catch2/catch.hpp>

#include <algorithm>
#include <set>
#include <string>

#include "mare/evalkit.hpp"
#include "mare/rng.hpp"
#include "mare/synth.hpp"
#include "test_helpers.hpp"

using namespace mare;
using mare::testing::make_doc;
using mare::testing::toy_schema;

namespace {

Relation accident(std::initializer_list<Attribute> attrs) { return Relation{"Accident", attrs}; }

RelationsByDoc one_doc(std::string id, std::vector<Relation> rels) {
  RelationsByDoc m;
  m[std::move(id)] = std::move(rels);
  return m;
}

// Random relation sets for fuzz checks; spans drawn from a small grid so
// collisions between pred and gold actually happen.
std::vector<Relation> random_relations(Rng& rng, const Schema& schema) {
  std::vector<Relation> out;
  size_t count = rng.next_below(4);
  for (size_t i = 0; i < count; ++i) {
    const LabelDef& label = schema.labels()[rng.next_below(schema.labels().size())];
    Relation rel;
    rel.label = label.name;
    size_t attrs = 1 + rng.next_below(3);
    std::set<int> starts;
    for (size_t a = 0; a < attrs; ++a) {
      int start = static_cast<int>(rng.next_below(8));
      if (!starts.insert(start).second) continue;
      rel.attributes.push_back(
          Attribute{{start, start + 1}, label.roles[rng.next_below(label.roles.size())].name});
    }
    if (!rel.attributes.empty()) out.push_back(std::move(rel));
  }
  return out;
}

}  // namespace

TEST_CASE("score_ar compares flattened attribute triples") {
  Schema schema = toy_schema();
  auto gold = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}, {{4, 5}, "Delay"}})});

  PRF perfect = score_ar(gold, gold);
  CHECK(perfect.precision() == 1.0);
  CHECK(perfect.recall() == 1.0);
  CHECK(perfect.f1() == 1.0);

  auto half = one_doc("d", {accident({{{0, 1}, "Trigger"}})});
  auto two_gold = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}})});
  PRF prf = score_ar(half, two_gold);
  CHECK(prf.precision() == 1.0);
  CHECK(prf.recall() == 0.5);
  CHECK(prf.f1() == Approx(2.0 / 3.0));

  // Correct span and role but wrong relation label scores nothing.
  auto wrong_label = one_doc("d", {Relation{"Obstruction", {{{0, 1}, "Trigger"}}}});
  auto right_label = one_doc("d", {accident({{{0, 1}, "Trigger"}})});
  CHECK(score_ar(wrong_label, right_label).true_positives == 0);
}

TEST_CASE("score_ar treats unknown prediction ids as false positives") {
  Schema schema = toy_schema();
  auto pred = one_doc("ghost", {accident({{{0, 1}, "Trigger"}})});
  PRF prf = score_ar(pred, {});
  CHECK(prf.true_positives == 0);
  CHECK(prf.predicted == 1);
  CHECK(prf.gold == 0);
  CHECK(prf.precision() == 0.0);
  CHECK(prf.recall() == 0.0);
}

TEST_CASE("score_cl matches labels one-to-one") {
  Schema schema = toy_schema();
  auto gold = one_doc("d", {accident({{{0, 1}, "Trigger"}})});
  CHECK(score_cl(one_doc("d", {accident({{{4, 5}, "Delay"}})}), gold, schema).f1() == 1.0);

  auto two_pred = one_doc("d", {accident({{{0, 1}, "Trigger"}}), accident({{{2, 3}, "Trigger"}})});
  PRF prf = score_cl(two_pred, gold, schema);
  CHECK(prf.true_positives == 1);
  CHECK(prf.precision() == 0.5);
  CHECK(prf.recall() == 1.0);

  auto wrong = one_doc("d", {Relation{"Obstruction", {{{0, 1}, "Trigger"}}}});
  CHECK(score_cl(wrong, gold, schema).true_positives == 0);
}

TEST_CASE("score_mre ignores optional attributes but pins mandatory spans") {
  Schema schema = toy_schema();
  auto gold = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}})});

  // Extra optional attribute in the prediction still matches.
  auto extra_optional =
      one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}, {{5, 6}, "Delay"}})});
  CHECK(score_mre(extra_optional, gold, schema).f1() == 1.0);

  // A mandatory span off by one token breaks the match.
  auto off_by_one = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{3, 4}, "Location"}})});
  CHECK(score_mre(off_by_one, gold, schema).true_positives == 0);

  auto two_gold = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}}),
                                accident({{{10, 11}, "Trigger"}, {{12, 13}, "Location"}})});
  auto one_right = one_doc("d", {accident({{{10, 11}, "Trigger"}, {{12, 13}, "Location"}})});
  PRF prf = score_mre(one_right, two_gold, schema);
  CHECK(prf.precision() == 1.0);
  CHECK(prf.recall() == 0.5);
}

TEST_CASE("score_cre requires the complete attribute set") {
  Schema schema = toy_schema();
  auto gold = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}, {{5, 6}, "Delay"}})});
  CHECK(score_cre(gold, gold, schema).f1() == 1.0);

  auto missing_optional = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}})});
  CHECK(score_cre(missing_optional, gold, schema).true_positives == 0);
  CHECK(score_mre(missing_optional, gold, schema).true_positives == 1);

  auto hallucinated = one_doc("d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"},
                                              {{5, 6}, "Delay"}, {{7, 8}, "Delay"}})});
  CHECK(score_cre(hallucinated, gold, schema).true_positives == 0);
}

TEST_CASE("score_bre equals MRE on an all-binary corpus and filters the rest") {
  Schema schema = toy_schema();
  std::vector<Document> gold_docs;
  gold_docs.push_back(make_doc(
      "bin", testing::filler_tokens(8),
      {Relation{"Accident", {Attribute{{0, 1}, "Trigger"}, Attribute{{2, 3}, "Location"}}}}));
  gold_docs.push_back(make_doc(
      "tri", testing::filler_tokens(8),
      {Relation{"Accident", {Attribute{{0, 1}, "Trigger"}, Attribute{{2, 3}, "Location"},
                             Attribute{{4, 5}, "Location"}}}}));

  RelationsByDoc pred;
  pred["bin"] = {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}})};
  pred["tri"] = {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}, {{4, 5}, "Location"}})};

  PRF bre = score_bre(pred, gold_docs, schema);
  // The three-mandatory document is excluded from both sides.
  CHECK(bre.gold == 1);
  CHECK(bre.predicted == 1);
  CHECK(bre.true_positives == 1);

  std::vector<Document> binary_only{gold_docs[0]};
  RelationsByDoc pred_binary{{"bin", pred["bin"]}};
  PRF mre = score_mre(pred_binary, gold_relations(binary_only), schema);
  PRF bre2 = score_bre(pred_binary, binary_only, schema);
  CHECK(bre2.true_positives == mre.true_positives);
  CHECK(bre2.predicted == mre.predicted);
  CHECK(bre2.gold == mre.gold);
}

TEST_CASE("strip_triggers removes trigger attributes and empty relations") {
  Schema schema = toy_schema();
  RelationsByDoc input = one_doc(
      "d", {accident({{{0, 1}, "Trigger"}, {{2, 3}, "Location"}}),   // loses its trigger
            accident({{{5, 6}, "Trigger"}}),                          // only a trigger: dropped
            Relation{"Obstruction", {{{7, 8}, "Location"}}}});        // untouched
  RelationsByDoc out = strip_triggers(input, schema);
  REQUIRE(out["d"].size() == 2);
  CHECK(out["d"][0] == accident({{{2, 3}, "Location"}}));  // single-attribute relation kept
  CHECK(out["d"][1] == Relation{"Obstruction", {{{7, 8}, "Location"}}});
}

TEST_CASE("matching criteria nest: CRE implies MRE implies Cl") {
  Schema schema = toy_schema();
  Rng rng(61);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<Relation> a = random_relations(rng, schema);
    std::vector<Relation> b = random_relations(rng, schema);
    for (const auto& p : a)
      for (const auto& g : b) {
        bool cre = p.label == g.label && detail::full_set(p) == detail::full_set(g);
        bool mre = p.label == g.label &&
                   detail::mandatory_set(p, schema) == detail::mandatory_set(g, schema);
        bool cl = p.label == g.label;
        if (cre) CHECK(mre);
        if (mre) CHECK(cl);
      }
  }
}

TEST_CASE("PRF invariants and pred/gold swap symmetry hold under fuzz") {
  Schema schema = toy_schema();
  Rng rng(67);
  for (int iter = 0; iter < 200; ++iter) {
    RelationsByDoc pred, gold;
    size_t docs = 1 + rng.next_below(3);
    for (size_t d = 0; d < docs; ++d) {
      std::string id = "doc" + std::to_string(d);
      pred[id] = random_relations(rng, schema);
      gold[id] = random_relations(rng, schema);
    }
    for (int strat = 0; strat < 4; ++strat) {
      auto run = [&](const RelationsByDoc& p, const RelationsByDoc& g) {
        switch (strat) {
          case 0: return score_ar(p, g);
          case 1: return score_cl(p, g, schema);
          case 2: return score_mre(p, g, schema);
          default: return score_cre(p, g, schema);
        }
      };
      PRF forward = run(pred, gold);
      PRF backward = run(gold, pred);
      CHECK(forward.true_positives <= std::min(forward.predicted, forward.gold));
      CHECK(forward.precision() >= 0.0);
      CHECK(forward.precision() <= 1.0);
      CHECK(forward.recall() >= 0.0);
      CHECK(forward.recall() <= 1.0);
      CHECK(forward.f1() >= 0.0);
      CHECK(forward.f1() <= 1.0);
      CHECK(forward.true_positives == backward.true_positives);
      CHECK(forward.precision() == backward.recall());
      CHECK(forward.recall() == backward.precision());
    }
  }
}

TEST_CASE("scoring is invariant under relation order permutations") {
  Schema schema = toy_schema();
  Rng rng(71);
  for (int iter = 0; iter < 100; ++iter) {
    RelationsByDoc pred, gold;
    pred["d"] = random_relations(rng, schema);
    gold["d"] = random_relations(rng, schema);
    RelationsByDoc pred_shuffled = pred, gold_shuffled = gold;
    rng.shuffle(pred_shuffled["d"]);
    rng.shuffle(gold_shuffled["d"]);
    for (int strat = 0; strat < 4; ++strat) {
      auto run = [&](const RelationsByDoc& p, const RelationsByDoc& g) {
        switch (strat) {
          case 0: return score_ar(p, g);
          case 1: return score_cl(p, g, schema);
          case 2: return score_mre(p, g, schema);
          default: return score_cre(p, g, schema);
        }
      };
      PRF original = run(pred, gold);
      PRF shuffled = run(pred_shuffled, gold_shuffled);
      CHECK(original.true_positives == shuffled.true_positives);
      CHECK(original.predicted == shuffled.predicted);
      CHECK(original.gold == shuffled.gold);
    }
  }
}

TEST_CASE("evaluate renders the fixed strategy order and 4-decimal scalars") {
  Schema schema = toy_schema();
  std::vector<Document> gold_docs;
  gold_docs.push_back(make_doc(
      "d1", testing::filler_tokens(8),
      {Relation{"Accident", {Attribute{{0, 1}, "Trigger"}, Attribute{{2, 3}, "Location"}}},
       Relation{"Accident", {Attribute{{4, 5}, "Trigger"}, Attribute{{6, 7}, "Location"}}},
       Relation{"Accident", {Attribute{{1, 2}, "Trigger"}, Attribute{{3, 4}, "Location"}}},
       Relation{"Accident", {Attribute{{5, 6}, "Trigger"}, Attribute{{7, 8}, "Location"}}}}));
  RelationsByDoc pred;
  pred["d1"] = {Relation{"Accident", {Attribute{{0, 1}, "Trigger"}, Attribute{{2, 3}, "Location"}}},
                Relation{"Obstruction", {Attribute{{4, 5}, "Trigger"}}}};

  MetricsReport report = evaluate(pred, gold_docs, schema, all_strategies());
  REQUIRE(report.scores.size() == 5);
  CHECK(report.scores[0].first == Strategy::AR);
  CHECK(report.scores[1].first == Strategy::Cl);
  CHECK(report.scores[2].first == Strategy::MRE);
  CHECK(report.scores[3].first == Strategy::CRE);
  CHECK(report.scores[4].first == Strategy::BRE);

  // MRE here: P = 1/2, R = 1/4 -> F1 = 1/3, rendered as 0.3333.
  const PRF* mre = report.find(Strategy::MRE);
  REQUIRE(mre != nullptr);
  CHECK(mre->precision() == 0.5);
  CHECK(mre->recall() == 0.25);
  auto j = report_to_json(report);
  CHECK(j["scores"]["MRE"]["f1"].get<double>() == Approx(0.3333).margin(1e-12));
  CHECK(j["scores"]["MRE"]["truePositives"].get<int>() == 1);

  std::string table = render_report_table(report, "fixture");
  CHECK_THAT(table, Catch::Contains("AR") && Catch::Contains("BRE") && Catch::Contains("0.3333"));
}

TEST_CASE("evaluate with pred equal to gold scores one everywhere") {
  SynthConfig synth_config;
  synth_config.document_count = 25;
  synth_config.seed = 73;
  SynthResult synth = generate_corpus(synth_config);
  RelationsByDoc pred = gold_relations(synth.documents);
  MetricsReport report = evaluate(pred, synth.documents, synth.schema, all_strategies());
  for (const auto& [s, prf] : report.scores) {
    CHECK(prf.precision() == 1.0);
    CHECK(prf.recall() == 1.0);
  }
}

TEST_CASE("trigger exclusion does not change binary-subset membership") {
  Schema schema = toy_schema();
  // Binary relation: trigger + location are the two mandatory instances.
  // Stripping the trigger must not evict the document from the BRE subset.
  std::vector<Document> gold_docs;
  gold_docs.push_back(make_doc(
      "d", testing::filler_tokens(6),
      {Relation{"Accident", {Attribute{{0, 1}, "Trigger"}, Attribute{{2, 3}, "Location"}}}}));
  RelationsByDoc pred = gold_relations(gold_docs);
  MetricsReport report = evaluate(pred, gold_docs, schema, {Strategy::BRE}, true);
  REQUIRE(report.scores.size() == 1);
  CHECK(report.scores[0].second.gold == 1);
  CHECK(report.scores[0].second.precision() == 1.0);
  CHECK(report.scores[0].second.recall() == 1.0);
}

TEST_CASE("trigger-excluded evaluation drops trigger-only gold relations") {
  Schema schema = toy_schema();
  std::vector<Document> gold_docs;
  gold_docs.push_back(make_doc(
      "d", testing::filler_tokens(6),
      {Relation{"Accident", {Attribute{{0, 1}, "Trigger"}}},
       Relation{"Accident", {Attribute{{2, 3}, "Trigger"}, Attribute{{4, 5}, "Location"}}}}));
  RelationsByDoc pred = gold_relations(gold_docs);
  MetricsReport with = evaluate(pred, gold_docs, schema, {Strategy::AR});
  MetricsReport without = evaluate(pred, gold_docs, schema, {Strategy::AR}, true);
  CHECK(with.scores[0].second.gold == 3);
  CHECK(without.scores[0].second.gold == 1);
  CHECK(without.scores[0].second.precision() == 1.0);
}
