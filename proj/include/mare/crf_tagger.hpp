#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mare/crf.hpp"
#include "mare/document.hpp"
#include "mare/optimizer.hpp"
#include "mare/rng.hpp"
#include "mare/schema.hpp"
#include "mare/tagscheme.hpp"

namespace mare {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainLog {
  std::vector<double> epoch_losses;  // mean NLL per document
};

// Trains the sequence tagger: gold tags from encode(), batched NLL gradients,
// AdamW. Deterministic for a fixed seed: Fisher-Yates shuffling with the
// toolkit RNG, fixed accumulation order, fixed feature hashing.
inline CrfModel train_crf(const std::vector<Document>& corpus, const Schema& schema,
                          const TrainConfig& config, TrainLog* log = nullptr) {
  if (corpus.empty()) throw ConfigError("train: corpus is empty");
  if (config.learning_rate <= 0) throw ConfigError("train: learningRate must be > 0");
  if (config.batch_size < 1) throw ConfigError("train: batchSize must be >= 1");

  TagSet tag_set(schema);
  const size_t K = tag_set.size();

  std::vector<FeatureSequence> features;
  std::vector<std::vector<int>> gold;
  features.reserve(corpus.size());
  gold.reserve(corpus.size());
  for (const auto& doc : corpus) {
    features.push_back(extract_document_features(doc.tokens, config.hash_space));
    auto [tags, report] = encode(doc, schema);
    gold.push_back(tag_set.to_indices(tags));
  }

  CrfModel model = CrfModel::zeros(config.hash_space, K);
  model.schema_fingerprint = schema.fingerprint();
  model.tag_names = tag_set.names();
  model.config = config;

  AdamW emission_opt(model.emission_weights.size(), config.learning_rate, config.weight_decay);
  AdamW transition_opt(model.transition.size(), config.learning_rate, config.weight_decay);
  AdamW start_opt(model.start.size(), config.learning_rate, config.weight_decay);
  AdamW end_opt(model.end.size(), config.learning_rate, config.weight_decay);

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed);

  CrfGradient batch_grad, doc_grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(order.size(), begin + static_cast<size_t>(config.batch_size));
      batch_grad.init(K);
      for (size_t i = begin; i < end; ++i) {
        size_t d = order[i];
        epoch_loss += nll_and_gradient(model, features[d], gold[d], doc_grad);
        batch_grad.add(doc_grad);
      }
      batch_grad.scale(1.0 / static_cast<double>(end - begin));

      emission_opt.begin_step();
      transition_opt.begin_step();
      start_opt.begin_step();
      end_opt.begin_step();
      for (const auto& [f, row] : batch_grad.emission_rows)
        for (size_t k = 0; k < K; ++k)
          emission_opt.update_one(model.emission_weights, static_cast<size_t>(f) * K + k, row[k]);
      transition_opt.update(model.transition, batch_grad.transition);
      start_opt.update(model.start, batch_grad.start);
      end_opt.update(model.end, batch_grad.end);
    }
    if (log != nullptr) log->epoch_losses.push_back(epoch_loss / static_cast<double>(corpus.size()));
  }
  return model;
}

// Viterbi decode of one document under a trained model.
inline TagSequence predict_tags(const CrfModel& model, const Document& doc, const Schema& schema) {
  if (model.schema_fingerprint != schema.fingerprint())
    throw ConfigError("predict: model schema fingerprint " + model.schema_fingerprint +
                      " does not match schema " + schema.fingerprint());
  TagSet tag_set(schema);
  if (tag_set.size() != model.num_tags)
    throw ConfigError("predict: tag set size mismatch");
  FeatureSequence features = extract_document_features(doc.tokens, model.hash_space);
  ViterbiResult v = viterbi(score_potentials(model, features));
  return tag_set.from_indices(v.tags);
}

}  // namespace mare
