#include <catch2/catch.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mare/corpus_io.hpp"
#include "mare/evalkit.hpp"
#include "mare/prediction_io.hpp"
#include "mare/stats.hpp"
#include "mare/synth.hpp"

namespace fs = std::filesystem;
using namespace mare;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

CliRun run_cli(const fs::path& dir, const std::string& args) {
  fs::path out = dir / "stdout.txt";
  fs::path err = dir / "stderr.txt";
  std::string cmd = std::string(MARE_CLI_PATH) + " " + args + " >" + out.string() + " 2>" +
                    err.string();
  int status = std::system(cmd.c_str());
  CliRun r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = slurp(out);
  r.stderr_text = slurp(err);
  return r;
}

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& file) const { return (dir / file).string(); }
};

}  // namespace

TEST_CASE("cli synth is deterministic and emits a valid corpus plus schema") {
  Workspace ws("mare_cli_synth");
  auto first = run_cli(ws.dir, "synth --out " + ws.path("a.jsonl") + " --schema-out " +
                                   ws.path("schema.json") + " --doc-count 30 --seed 5");
  REQUIRE(first.exit_code == 0);
  auto second = run_cli(ws.dir, "synth --out " + ws.path("b.jsonl") + " --doc-count 30 --seed 5");
  REQUIRE(second.exit_code == 0);
  CHECK(slurp(ws.path("a.jsonl")) == slurp(ws.path("b.jsonl")));

  auto docs = read_corpus_file(ws.path("a.jsonl"));
  CHECK(docs.size() == 30);
  Schema schema = Schema::load_file(ws.path("schema.json"));
  CHECK(!schema.labels().empty());
}

TEST_CASE("cli stats reports counts for each split") {
  Workspace ws("mare_cli_stats");
  REQUIRE(run_cli(ws.dir, "synth --out " + ws.path("train.jsonl") + " --schema-out " +
                              ws.path("schema.json") + " --doc-count 25 --seed 6")
              .exit_code == 0);
  REQUIRE(run_cli(ws.dir, "synth --out " + ws.path("test.jsonl") + " --doc-count 10 --seed 7")
              .exit_code == 0);
  auto run = run_cli(ws.dir, "stats --corpus " + ws.path("train.jsonl") + " --corpus " +
                                 ws.path("test.jsonl") + " --schema " + ws.path("schema.json") +
                                 " --out " + ws.path("stats.json"));
  REQUIRE(run.exit_code == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(ws.path("stats.json")));
  REQUIRE(j["splits"].size() == 2);
  CHECK(j["splits"][0]["documentCount"].get<int>() == 25);
  CHECK(j["splits"][1]["documentCount"].get<int>() == 10);
  CHECK(j["total"]["documentCount"].get<int>() == 35);
  CHECK(j["total"].contains("explicitness"));
  CHECK(j["total"].contains("binarySubsetDocuments"));

  auto docs = read_corpus_file(ws.path("train.jsonl"));
  Schema schema = Schema::load_file(ws.path("schema.json"));
  CorpusStats expect = corpus_stats(docs, schema);
  CHECK(j["splits"][0]["relationCount"].get<size_t>() == expect.relation_count);
  CHECK(j["splits"][0]["wordCount"].get<size_t>() == expect.word_count);
}

TEST_CASE("cli train/predict round trip memorizes a tiny corpus") {
  Workspace ws("mare_cli_train");
  REQUIRE(run_cli(ws.dir, "synth --out " + ws.path("train.jsonl") + " --schema-out " +
                              ws.path("schema.json") + " --doc-count 4 --seed 8")
              .exit_code == 0);
  {
    std::ofstream config(ws.path("config.json"));
    config << R"({"train": {"learningRate": 0.1, "weightDecay": 0.0, "epochs": 150,)"
           << R"( "hashSpace": 16384}})";
  }
  auto train = run_cli(ws.dir, "train --approach seq --corpus " + ws.path("train.jsonl") +
                                   " --schema " + ws.path("schema.json") + " --config " +
                                   ws.path("config.json") + " --seed 9 --out " +
                                   ws.path("seq.model"));
  REQUIRE(train.exit_code == 0);
  CHECK_THAT(train.stderr_text, Catch::Contains("final loss"));

  auto train_again = run_cli(ws.dir, "train --approach seq --corpus " + ws.path("train.jsonl") +
                                         " --schema " + ws.path("schema.json") + " --config " +
                                         ws.path("config.json") + " --seed 9 --out " +
                                         ws.path("seq2.model"));
  REQUIRE(train_again.exit_code == 0);
  CHECK(slurp(ws.path("seq.model")) == slurp(ws.path("seq2.model")));

  auto predict = run_cli(ws.dir, "predict --corpus " + ws.path("train.jsonl") + " --schema " +
                                     ws.path("schema.json") + " --model " + ws.path("seq.model") +
                                     " --out " + ws.path("pred.jsonl"));
  REQUIRE(predict.exit_code == 0);

  auto eval = run_cli(ws.dir, "eval --corpus " + ws.path("train.jsonl") + " --schema " +
                                  ws.path("schema.json") + " --pred " + ws.path("pred.jsonl") +
                                  " --out " + ws.path("report.json"));
  REQUIRE(eval.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(slurp(ws.path("report.json")));
  CHECK(report["scores"]["MRE"]["f1"].get<double>() == Approx(1.0));
  CHECK(report["scores"]["CRE"]["f1"].get<double>() == Approx(1.0));
  CHECK_THAT(eval.stdout_text, Catch::Contains("AR") && Catch::Contains("MRE"));
}

TEST_CASE("cli span train/predict memorizes and dumps raw span probabilities") {
  Workspace ws("mare_cli_span");
  {
    std::ofstream synth_config(ws.path("synth.json"));
    synth_config << R"({"synth": {"documentCount": 4, "optionalAttributeProbability": 0.0,)"
                 << R"( "seed": 14}})";
  }
  REQUIRE(run_cli(ws.dir, "synth --out " + ws.path("train.jsonl") + " --schema-out " +
                              ws.path("schema.json") + " --config " + ws.path("synth.json"))
              .exit_code == 0);
  {
    std::ofstream config(ws.path("config.json"));
    config << R"({"span": {"epochs": 250, "embeddingDim": 16, "learningRate": 0.05,)"
           << R"( "embeddingLearningRate": 0.05, "weightDecay": 0.0}})";
  }
  REQUIRE(run_cli(ws.dir, "train --approach span --corpus " + ws.path("train.jsonl") +
                              " --schema " + ws.path("schema.json") + " --config " +
                              ws.path("config.json") + " --seed 15 --out " + ws.path("span.model"))
              .exit_code == 0);
  auto predict = run_cli(ws.dir, "predict --corpus " + ws.path("train.jsonl") + " --schema " +
                                     ws.path("schema.json") + " --model " + ws.path("span.model") +
                                     " --span-dump " + ws.path("spans.jsonl") + " --out " +
                                     ws.path("pred.jsonl"));
  REQUIRE(predict.exit_code == 0);

  auto eval = run_cli(ws.dir, "eval --corpus " + ws.path("train.jsonl") + " --schema " +
                                  ws.path("schema.json") + " --pred " + ws.path("pred.jsonl") +
                                  " --out " + ws.path("report.json"));
  REQUIRE(eval.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(slurp(ws.path("report.json")));
  CHECK(report["scores"]["MRE"]["f1"].get<double>() == Approx(1.0));

  // The raw dump carries one record per document with probability fields.
  std::ifstream dump(ws.path("spans.jsonl"));
  std::string line;
  size_t lines = 0;
  while (std::getline(dump, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.contains("docId"));
    REQUIRE(j.contains("spans"));
    for (const auto& s : j["spans"]) {
      CHECK(s["prob"].get<double>() >= 0.0);
      CHECK(s["prob"].get<double>() <= 1.0);
    }
    ++lines;
  }
  CHECK(lines == 4);
}

TEST_CASE("cli eval honors --exclude-triggers") {
  Workspace ws("mare_cli_triggers");
  SynthConfig config;
  config.document_count = 10;
  config.seed = 16;
  SynthResult synth = generate_corpus(config);
  write_corpus_file(ws.path("gold.jsonl"), synth.documents);
  synth.schema.save_file(ws.path("schema.json"));
  {
    std::map<std::string, std::vector<AssembledRelation>> by_doc;
    for (const auto& doc : synth.documents) {
      std::vector<AssembledRelation> rels;
      for (const auto& r : doc.relations) {
        AssembledRelation ar;
        ar.label = r.label;
        for (const auto& a : r.attributes) ar.attributes.push_back({a, false});
        rels.push_back(std::move(ar));
      }
      by_doc[doc.id] = std::move(rels);
    }
    write_predictions_file(ws.path("pred.jsonl"), by_doc);
  }
  auto with = run_cli(ws.dir, "eval --corpus " + ws.path("gold.jsonl") + " --schema " +
                                  ws.path("schema.json") + " --pred " + ws.path("pred.jsonl") +
                                  " --strategy ar --out " + ws.path("with.json"));
  auto without = run_cli(ws.dir, "eval --corpus " + ws.path("gold.jsonl") + " --schema " +
                                     ws.path("schema.json") + " --pred " + ws.path("pred.jsonl") +
                                     " --strategy ar --exclude-triggers --out " +
                                     ws.path("without.json"));
  REQUIRE(with.exit_code == 0);
  REQUIRE(without.exit_code == 0);
  nlohmann::json jw = nlohmann::json::parse(slurp(ws.path("with.json")));
  nlohmann::json jo = nlohmann::json::parse(slurp(ws.path("without.json")));
  CHECK(jo["excludeTriggers"].get<bool>());
  // Every relation carries exactly one trigger attribute in this corpus.
  size_t gold_with = jw["scores"]["AR"]["goldCount"].get<size_t>();
  size_t gold_without = jo["scores"]["AR"]["goldCount"].get<size_t>();
  CHECK(gold_without < gold_with);
  CHECK(jo["scores"]["AR"]["precision"].get<double>() == Approx(1.0));
}

TEST_CASE("cli eval scores a pred-equals-gold fixture at one") {
  Workspace ws("mare_cli_eval");
  SynthConfig config;
  config.document_count = 12;
  config.seed = 10;
  SynthResult synth = generate_corpus(config);
  write_corpus_file(ws.path("gold.jsonl"), synth.documents);
  synth.schema.save_file(ws.path("schema.json"));
  {
    std::map<std::string, std::vector<AssembledRelation>> by_doc;
    for (const auto& doc : synth.documents) {
      std::vector<AssembledRelation> rels;
      for (const auto& r : doc.relations) {
        AssembledRelation ar;
        ar.label = r.label;
        for (const auto& a : r.attributes) ar.attributes.push_back({a, false});
        ar.mandatory_complete = true;
        rels.push_back(std::move(ar));
      }
      by_doc[doc.id] = std::move(rels);
    }
    write_predictions_file(ws.path("pred.jsonl"), by_doc);
  }
  auto run = run_cli(ws.dir, "eval --corpus " + ws.path("gold.jsonl") + " --schema " +
                                 ws.path("schema.json") + " --pred " + ws.path("pred.jsonl") +
                                 " --strategy ar,cl,mre,cre,bre --out " + ws.path("report.json"));
  REQUIRE(run.exit_code == 0);
  nlohmann::json report = nlohmann::json::parse(slurp(ws.path("report.json")));
  for (const char* s : {"AR", "Cl", "MRE", "CRE", "BRE"}) {
    CHECK(report["scores"][s]["precision"].get<double>() == Approx(1.0));
    CHECK(report["scores"][s]["recall"].get<double>() == Approx(1.0));
  }
}

TEST_CASE("cli predict handles an empty corpus and a threshold of one") {
  Workspace ws("mare_cli_empty");
  REQUIRE(run_cli(ws.dir, "synth --out " + ws.path("train.jsonl") + " --schema-out " +
                              ws.path("schema.json") + " --doc-count 3 --seed 11")
              .exit_code == 0);
  {
    std::ofstream config(ws.path("config.json"));
    config << R"({"span": {"epochs": 2, "embeddingDim": 8}})";
  }
  REQUIRE(run_cli(ws.dir, "train --approach span --corpus " + ws.path("train.jsonl") +
                              " --schema " + ws.path("schema.json") + " --config " +
                              ws.path("config.json") + " --out " + ws.path("span.model"))
              .exit_code == 0);

  // Empty corpus in, empty predictions out.
  { std::ofstream empty(ws.path("empty.jsonl")); }
  auto empty_run = run_cli(ws.dir, "predict --corpus " + ws.path("empty.jsonl") + " --schema " +
                                       ws.path("schema.json") + " --model " + ws.path("span.model") +
                                       " --out " + ws.path("pred_empty.jsonl"));
  REQUIRE(empty_run.exit_code == 0);
  CHECK(slurp(ws.path("pred_empty.jsonl")).empty());

  // Threshold 1.0: every document present, all relation lists empty.
  auto run = run_cli(ws.dir, "predict --corpus " + ws.path("train.jsonl") + " --schema " +
                                 ws.path("schema.json") + " --model " + ws.path("span.model") +
                                 " --threshold 1.0 --out " + ws.path("pred_none.jsonl"));
  REQUIRE(run.exit_code == 0);
  RelationsByDoc pred = read_predictions_file(ws.path("pred_none.jsonl"));
  CHECK(pred.size() == 3);
  for (const auto& [id, rels] : pred) CHECK(rels.empty());
}

TEST_CASE("cli surfaces missing paths and fingerprint mismatches") {
  Workspace ws("mare_cli_errors");
  auto missing = run_cli(ws.dir, "stats --corpus " + ws.path("nope.jsonl") + " --schema " +
                                     ws.path("nope_schema.json"));
  CHECK(missing.exit_code != 0);
  CHECK_THAT(missing.stderr_text, Catch::Contains("nope_schema.json"));

  REQUIRE(run_cli(ws.dir, "synth --out " + ws.path("train.jsonl") + " --schema-out " +
                              ws.path("schema.json") + " --doc-count 3 --seed 12")
              .exit_code == 0);
  {
    std::ofstream config(ws.path("config.json"));
    config << R"({"train": {"epochs": 1, "hashSpace": 1024}})";
  }
  REQUIRE(run_cli(ws.dir, "train --approach seq --corpus " + ws.path("train.jsonl") +
                              " --schema " + ws.path("schema.json") + " --config " +
                              ws.path("config.json") + " --out " + ws.path("seq.model"))
              .exit_code == 0);

  // A different schema must be refused with both fingerprints printed.
  Schema other({LabelDef{"Other",
                         {RoleDef{"a", true, false, {}}, RoleDef{"b", true, false, {}}},
                         false}});
  other.save_file(ws.path("other_schema.json"));
  auto mismatch = run_cli(ws.dir, "predict --corpus " + ws.path("train.jsonl") + " --schema " +
                                      ws.path("other_schema.json") + " --model " +
                                      ws.path("seq.model") + " --out " + ws.path("pred.jsonl"));
  CHECK(mismatch.exit_code != 0);
  CHECK_THAT(mismatch.stderr_text, Catch::Contains("fingerprint"));
  CHECK_THAT(mismatch.stderr_text, Catch::Contains(other.fingerprint()));
}

TEST_CASE("cli eval warns about unmatched document ids but proceeds") {
  Workspace ws("mare_cli_warn");
  SynthConfig config;
  config.document_count = 4;
  config.seed = 13;
  SynthResult synth = generate_corpus(config);
  write_corpus_file(ws.path("gold.jsonl"), synth.documents);
  synth.schema.save_file(ws.path("schema.json"));
  {
    std::map<std::string, std::vector<AssembledRelation>> by_doc;
    AssembledRelation ar;
    ar.label = synth.documents[0].relations[0].label;
    for (const auto& a : synth.documents[0].relations[0].attributes)
      ar.attributes.push_back({a, false});
    by_doc[synth.documents[0].id] = {ar};
    by_doc["not-in-gold"] = {};
    write_predictions_file(ws.path("pred.jsonl"), by_doc);
  }
  auto run = run_cli(ws.dir, "eval --corpus " + ws.path("gold.jsonl") + " --schema " +
                                 ws.path("schema.json") + " --pred " + ws.path("pred.jsonl"));
  REQUIRE(run.exit_code == 0);
  CHECK_THAT(run.stderr_text, Catch::Contains("warning"));
  CHECK_THAT(run.stderr_text, Catch::Contains("not-in-gold"));
}
