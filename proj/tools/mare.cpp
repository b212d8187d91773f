// mare: multi-attribute relation extraction toolkit CLI.
//
// Subcommands: train, predict, eval, stats, synth, convert. All diagnostics
// go to stderr; data goes to files. Every command is deterministic for a
// fixed (config, seed).

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mare/mare.hpp"

namespace {

struct CommonPaths {
  std::vector<std::string> corpus;
  std::string schema;
  std::string model;
  std::string out;
  std::string config;
};

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config: top-level object expected in " + path);
  return j;
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& target) {
  if (j.contains(key)) target = j[key].get<T>();
}

mare::TrainConfig train_config_from(const nlohmann::json& config) {
  mare::TrainConfig c;  // defaults: lr 1e-3, decay 1e-2, batch 6
  if (!config.contains("train")) return c;
  const auto& j = config["train"];
  maybe(j, "learningRate", c.learning_rate);
  maybe(j, "weightDecay", c.weight_decay);
  maybe(j, "batchSize", c.batch_size);
  maybe(j, "epochs", c.epochs);
  maybe(j, "seed", c.seed);
  maybe(j, "hashSpace", c.hash_space);
  return c;
}

mare::SpanTrainConfig span_config_from(const nlohmann::json& config) {
  mare::SpanTrainConfig c;  // defaults: head/attention 1e-3, embedder 5e-5, batch 6
  if (!config.contains("span")) return c;
  const auto& j = config["span"];
  maybe(j, "embeddingDim", c.embedding_dim);
  maybe(j, "maxSpanWidth", c.max_span_width);
  maybe(j, "contextWindow", c.context_window);
  maybe(j, "learningRate", c.learning_rate);
  maybe(j, "embeddingLearningRate", c.embedding_learning_rate);
  maybe(j, "weightDecay", c.weight_decay);
  maybe(j, "batchSize", c.batch_size);
  maybe(j, "epochs", c.epochs);
  maybe(j, "seed", c.seed);
  maybe(j, "threshold", c.threshold);
  maybe(j, "negativeSampleRate", c.negative_sample_rate);
  return c;
}

mare::AssemblyConfig assembly_config_from(const nlohmann::json& config) {
  mare::AssemblyConfig c;
  if (!config.contains("assembly")) return c;
  const auto& j = config["assembly"];
  maybe(j, "maxRelationWidth", c.max_relation_width);
  maybe(j, "enableCompletion", c.enable_completion);
  maybe(j, "enableSplitting", c.enable_splitting);
  return c;
}

mare::SynthConfig synth_config_from(const nlohmann::json& config) {
  mare::SynthConfig c;
  if (!config.contains("synth")) return c;
  const auto& j = config["synth"];
  maybe(j, "documentCount", c.document_count);
  maybe(j, "optionalAttributeProbability", c.optional_attribute_probability);
  maybe(j, "multiRelationProbability", c.multi_relation_probability);
  maybe(j, "sameLabelPairProbability", c.same_label_pair_probability);
  maybe(j, "sharedSpanProbability", c.shared_span_probability);
  maybe(j, "ambiguousPairProbability", c.ambiguous_pair_probability);
  maybe(j, "wideGap", c.wide_gap);
  maybe(j, "closeGap", c.close_gap);
  maybe(j, "seed", c.seed);
  return c;
}

std::vector<mare::Document> read_corpora(const std::vector<std::string>& paths) {
  std::vector<mare::Document> docs;
  for (const auto& p : paths) {
    auto part = mare::read_corpus_file(p);
    docs.insert(docs.end(), part.begin(), part.end());
  }
  return docs;
}

int run_train(const CommonPaths& paths, const std::string& approach, uint64_t seed, bool seed_set,
              int epochs, bool epochs_set, int max_span_width, bool span_width_set) {
  nlohmann::json config = load_config(paths.config);
  mare::Schema schema = mare::Schema::load_file(paths.schema);
  std::vector<mare::Document> corpus = read_corpora(paths.corpus);
  if (corpus.empty()) throw std::runtime_error("train: corpus is empty");
  for (const auto& doc : corpus) {
    auto violations = mare::validate_document(doc, schema);
    if (!violations.empty())
      throw std::runtime_error("train: document '" + doc.id +
                               "' does not conform to the schema: " + violations.front().message);
  }

  auto started = std::chrono::steady_clock::now();
  mare::TrainLog log;
  if (approach == "seq") {
    mare::TrainConfig c = train_config_from(config);
    if (seed_set) c.seed = seed;
    if (epochs_set) c.epochs = epochs;
    mare::CrfModel model = mare::train_crf(corpus, schema, c, &log);
    mare::save_crf_model(paths.out, model);
  } else {
    mare::SpanTrainConfig c = span_config_from(config);
    if (seed_set) c.seed = seed;
    if (epochs_set) c.epochs = epochs;
    if (span_width_set) c.max_span_width = max_span_width;
    mare::SpanModel model = mare::train_span(corpus, schema, c, &log);
    mare::save_span_model(paths.out, model);
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - started).count();
  std::cerr << "trained " << approach << " model on " << corpus.size() << " documents";
  if (!log.epoch_losses.empty()) std::cerr << ", final loss " << log.epoch_losses.back();
  std::cerr << ", " << static_cast<double>(elapsed) / 1000.0 << "s\n";
  std::cerr << "wrote " << paths.out << "\n";
  return 0;
}

int run_predict(const CommonPaths& paths, double threshold, bool threshold_set,
                int max_relation_width, bool width_set, const std::string& span_dump) {
  nlohmann::json config = load_config(paths.config);
  mare::Schema schema = mare::Schema::load_file(paths.schema);
  std::vector<mare::Document> corpus = read_corpora(paths.corpus);
  mare::AssemblyConfig assembly = assembly_config_from(config);
  if (width_set) assembly.max_relation_width = max_relation_width;

  std::map<std::string, std::vector<mare::AssembledRelation>> by_doc;
  const char kind = mare::artifact_kind(paths.model);
  std::ofstream dump;
  if (!span_dump.empty()) {
    dump.open(span_dump);
    if (!dump) throw std::runtime_error("predict: cannot write " + span_dump);
  }

  if (kind == 's') {
    mare::CrfModel model = mare::load_crf_model(paths.model);
    if (model.schema_fingerprint != schema.fingerprint())
      throw std::runtime_error("predict: model was trained against schema fingerprint " +
                               model.schema_fingerprint + " but --schema has fingerprint " +
                               schema.fingerprint());
    for (const auto& doc : corpus) {
      mare::TagSequence tags = mare::predict_tags(model, doc, schema);
      auto flat = mare::decode(tags, schema);
      by_doc[doc.id] = mare::assemble(flat, schema, assembly);
    }
  } else {
    mare::SpanModel model = mare::load_span_model(paths.model);
    if (model.schema_fingerprint != schema.fingerprint())
      throw std::runtime_error("predict: model was trained against schema fingerprint " +
                               model.schema_fingerprint + " but --schema has fingerprint " +
                               schema.fingerprint());
    const double cut = threshold_set ? threshold : model.threshold;
    for (const auto& doc : corpus) {
      auto spans = mare::predict_spans(model, doc, schema, cut);
      if (dump.is_open()) mare::write_span_dump(dump, doc.id, spans);
      std::vector<std::pair<std::string, mare::Attribute>> flat;
      for (const auto& s : spans) flat.push_back({s.label, mare::Attribute{s.span, s.role}});
      by_doc[doc.id] = mare::assemble(flat, schema, assembly);
    }
  }
  mare::write_predictions_file(paths.out, by_doc);
  std::cerr << "wrote predictions for " << by_doc.size() << " documents to " << paths.out << "\n";
  return 0;
}

int run_eval(const CommonPaths& paths, const std::string& pred_path, const std::string& strategies,
             bool exclude_triggers, bool per_label) {
  mare::Schema schema = mare::Schema::load_file(paths.schema);
  std::vector<mare::Document> gold = read_corpora(paths.corpus);
  mare::RelationsByDoc pred = mare::read_predictions_file(pred_path);

  std::set<std::string> gold_ids, pred_ids;
  for (const auto& d : gold) gold_ids.insert(d.id);
  for (const auto& [id, _] : pred) pred_ids.insert(id);
  std::vector<std::string> only_gold, only_pred;
  for (const auto& id : gold_ids)
    if (!pred_ids.count(id)) only_gold.push_back(id);
  for (const auto& id : pred_ids)
    if (!gold_ids.count(id)) only_pred.push_back(id);
  auto warn_ids = [](const char* what, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    std::cerr << "warning: " << ids.size() << " document id(s) " << what << ":";
    for (size_t i = 0; i < ids.size() && i < 10; ++i) std::cerr << ' ' << ids[i];
    if (ids.size() > 10) std::cerr << " ...";
    std::cerr << "\n";
  };
  warn_ids("have no predictions (scored as empty)", only_gold);
  warn_ids("are not in the gold corpus (scored as false positives)", only_pred);

  std::vector<mare::Strategy> wanted;
  {
    std::string item;
    std::istringstream ss(strategies);
    while (std::getline(ss, item, ','))
      if (!item.empty()) wanted.push_back(mare::strategy_from_name(item));
  }
  mare::MetricsReport report =
      mare::evaluate(pred, gold, schema, wanted, exclude_triggers, per_label);
  std::cout << mare::render_report_table(report);
  if (!paths.out.empty()) {
    std::ofstream out(paths.out);
    if (!out) throw std::runtime_error("eval: cannot write " + paths.out);
    out << mare::report_to_json(report).dump(2) << '\n';
    std::cerr << "wrote " << paths.out << "\n";
  }
  return 0;
}

int run_stats(const CommonPaths& paths, bool exclude_relation_free) {
  mare::Schema schema = mare::Schema::load_file(paths.schema);
  nlohmann::ordered_json splits = nlohmann::ordered_json::array();
  mare::CorpusStats total;
  size_t total_binary = 0;
  for (const auto& path : paths.corpus) {
    std::vector<mare::Document> docs = mare::read_corpus_file(path);
    mare::CorpusStats s = mare::corpus_stats(docs, schema);
    size_t binary = mare::binary_subset(docs, schema, exclude_relation_free).size();
    nlohmann::ordered_json js;
    js["path"] = path;
    js["documentCount"] = s.document_count;
    js["relationCount"] = s.relation_count;
    js["entityCount"] = s.entity_count;
    js["wordCount"] = s.word_count;
    js["multiTriggerRelationCount"] = s.multi_trigger_relation_count;
    js["binarySubsetDocuments"] = binary;
    splits.push_back(std::move(js));
    total.merge(s);
    total_binary += binary;
  }
  nlohmann::ordered_json j;
  j["splits"] = std::move(splits);
  j["total"] = total.to_json(schema);
  j["total"]["binarySubsetDocuments"] = total_binary;
  std::string rendered = j.dump(2) + "\n";
  if (!paths.out.empty()) {
    std::ofstream out(paths.out);
    if (!out) throw std::runtime_error("stats: cannot write " + paths.out);
    out << rendered;
    std::cerr << "wrote " << paths.out << "\n";
  } else {
    std::cout << rendered;
  }
  return 0;
}

int run_synth(const CommonPaths& paths, const std::string& schema_out, int doc_count,
              bool doc_count_set, uint64_t seed, bool seed_set) {
  nlohmann::json config = load_config(paths.config);
  mare::SynthConfig c = synth_config_from(config);
  if (doc_count_set) c.document_count = doc_count;
  if (seed_set) c.seed = seed;
  mare::SynthResult result = mare::generate_corpus(c);
  mare::write_corpus_file(paths.out, result.documents);
  std::cerr << "wrote " << result.documents.size() << " documents to " << paths.out << "\n";
  if (!schema_out.empty()) {
    result.schema.save_file(schema_out);
    std::cerr << "wrote " << schema_out << "\n";
  }
  return 0;
}

int run_convert(const CommonPaths& paths) {
  mare::ConvertStats stats;
  std::vector<mare::Document> docs;
  for (const auto& p : paths.corpus) {
    auto part = mare::convert_smartdata_file(p, stats);
    docs.insert(docs.end(), part.begin(), part.end());
  }
  mare::write_corpus_file(paths.out, docs);
  std::cerr << "converted " << stats.documents << " documents (" << stats.entities << " entities, "
            << stats.relations << " relations)";
  if (stats.snapped_spans > 0) std::cerr << ", " << stats.snapped_spans << " snapped spans";
  if (stats.skipped_entities > 0) std::cerr << ", " << stats.skipped_entities << " skipped entities";
  if (stats.skipped_relations > 0)
    std::cerr << ", " << stats.skipped_relations << " skipped relations";
  std::cerr << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mare: multi-attribute relation extraction toolkit"};
  app.require_subcommand(1);

  CommonPaths paths;
  std::string approach = "seq";
  uint64_t seed = 0;
  int epochs = 0;
  double threshold = 0.5;
  int max_relation_width = 20;
  int max_span_width = 8;
  std::string span_dump, pred_path, strategies = "ar,cl,mre,cre,bre", schema_out;
  bool exclude_triggers = false, per_label = false, exclude_relation_free = false;
  int doc_count = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_schema) {
    cmd->add_option("--corpus", paths.corpus, "corpus file(s), line-delimited JSON records")
        ->required();
    if (needs_schema) cmd->add_option("--schema", paths.schema, "schema file")->required();
    cmd->add_option("--config", paths.config, "run configuration file (JSON)");
  };

  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train, true);
  train->add_option("--approach", approach, "seq | span")
      ->check(CLI::IsMember({"seq", "span"}))
      ->required();
  train->add_option("--out", paths.out, "model artifact path")->required();
  auto* train_seed = train->add_option("--seed", seed, "training seed");
  auto* train_epochs = train->add_option("--epochs", epochs, "training epochs");
  auto* train_span_width =
      train->add_option("--max-span-width", max_span_width, "span enumeration cap (span models)");

  CLI::App* predict = app.add_subcommand("predict", "predict and assemble relations");
  add_common(predict, true);
  predict->add_option("--model", paths.model, "model artifact path")->required();
  predict->add_option("--out", paths.out, "predictions output path")->required();
  auto* pred_threshold =
      predict->add_option("--threshold", threshold, "span probability threshold");
  auto* pred_width = predict->add_option("--max-relation-width", max_relation_width,
                                         "assembly distance gate in tokens");
  predict->add_option("--span-dump", span_dump, "raw span probability dump path (span models)");

  CLI::App* eval = app.add_subcommand("eval", "score predictions against gold");
  add_common(eval, true);
  eval->add_option("--pred", pred_path, "predictions file")->required();
  eval->add_option("--strategy", strategies, "comma list of ar,cl,mre,cre,bre");
  eval->add_flag("--exclude-triggers", exclude_triggers, "trigger-excluded scoring");
  eval->add_flag("--per-label", per_label, "add per-label breakdown");
  eval->add_option("--out", paths.out, "metrics report path (JSON)");

  CLI::App* stats = app.add_subcommand("stats", "corpus statistics");
  add_common(stats, true);
  stats->add_flag("--exclude-relation-free", exclude_relation_free,
                  "exclude relation-free documents from the binary subset");
  stats->add_option("--out", paths.out, "stats report path (JSON)");

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", paths.out, "corpus output path")->required();
  synth->add_option("--schema-out", schema_out, "write the generator schema here");
  synth->add_option("--config", paths.config, "run configuration file (JSON)");
  auto* synth_count = synth->add_option("--doc-count", doc_count, "number of documents");
  auto* synth_seed = synth->add_option("--seed", seed, "generator seed");

  CLI::App* convert = app.add_subcommand("convert", "convert a SmartData export");
  convert->add_option("--in", paths.corpus, "SmartData export file(s)")->required();
  convert->add_option("--out", paths.out, "native corpus output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return run_train(paths, approach, seed, !train_seed->empty(), epochs,
                       !train_epochs->empty(), max_span_width, !train_span_width->empty());
    if (predict->parsed())
      return run_predict(paths, threshold, !pred_threshold->empty(), max_relation_width,
                         !pred_width->empty(), span_dump);
    if (eval->parsed())
      return run_eval(paths, pred_path, strategies, exclude_triggers, per_label);
    if (stats->parsed()) return run_stats(paths, exclude_relation_free);
    if (synth->parsed())
      return run_synth(paths, schema_out, doc_count, !synth_count->empty(), seed,
                       !synth_seed->empty());
    if (convert->parsed()) return run_convert(paths);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
