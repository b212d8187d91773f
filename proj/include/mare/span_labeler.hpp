#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mare/crf_tagger.hpp"  // ConfigError, TrainLog
#include "mare/document.hpp"
#include "mare/optimizer.hpp"
#include "mare/rng.hpp"
#include "mare/schema.hpp"

namespace mare {

// Flattened T = L x A_l in schema order.
class SpanLabelSet {
 public:
  struct Entry {
    std::string label;
    std::string role;
  };

  explicit SpanLabelSet(const Schema& schema) {
    for (const auto& l : schema.labels())
      for (const auto& r : l.roles) entries_.push_back({l.name, r.name});
  }

  size_t size() const { return entries_.size(); }
  const Entry& operator[](size_t i) const { return entries_.at(i); }
  const std::vector<Entry>& entries() const { return entries_; }

  int index_of(const std::string& label, const std::string& role) const {
    for (size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].label == label && entries_[i].role == role) return static_cast<int>(i);
    return -1;
  }

 private:
  std::vector<Entry> entries_;
};

// All spans [i, j) with 1 <= j - i <= min(max_width, n), sorted by
// (start, end). Count is sum_{w=1}^{min(W,n)} (n - w + 1).
inline std::vector<Span> enumerate_spans(int n, int max_width) {
  if (n < 1) throw std::invalid_argument("enumerate_spans: n must be >= 1");
  if (max_width < 1) throw std::invalid_argument("enumerate_spans: max width must be >= 1");
  std::vector<Span> out;
  const int cap = std::min(max_width, n);
  for (int start = 0; start < n; ++start)
    for (int end = start + 1; end <= std::min(n, start + cap); ++end)
      out.push_back(Span{start, end});
  return out;
}

// Max-shifted softmax over a span's attention scores; weights sum to 1.
inline std::vector<double> attention_weights(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("attention_weights: empty score slice");
  const double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double z = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - m);
    z += w[i];
  }
  for (double& x : w) x /= z;
  return w;
}

// rep = sum_k w_k c_k over the span, with w the softmax of the global
// attention scores a_k = c_k . M.
inline std::vector<double> span_representation(const std::vector<double>& contextualized,
                                               size_t n, size_t dim, Span span,
                                               const std::vector<double>& attention_vector) {
  if (span.start < 0 || span.end > static_cast<int>(n) || span.width() < 1)
    throw std::invalid_argument("span_representation: span out of bounds");
  if (attention_vector.size() != dim)
    throw std::invalid_argument("span_representation: attention vector dimension mismatch");
  std::vector<double> scores;
  scores.reserve(static_cast<size_t>(span.width()));
  for (int k = span.start; k < span.end; ++k) {
    const double* c = &contextualized[static_cast<size_t>(k) * dim];
    double a = 0.0;
    for (size_t j = 0; j < dim; ++j) a += c[j] * attention_vector[j];
    scores.push_back(a);
  }
  std::vector<double> w = attention_weights(scores);
  std::vector<double> rep(dim, 0.0);
  for (int k = span.start; k < span.end; ++k) {
    const double* c = &contextualized[static_cast<size_t>(k) * dim];
    const double wk = w[static_cast<size_t>(k - span.start)];
    for (size_t j = 0; j < dim; ++j) rep[j] += wk * c[j];
  }
  return rep;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// p_t = sigmoid(rep . head[:, t] + bias_t); independent per label (multi-label).
inline std::vector<double> span_label_probs(const std::vector<double>& rep,
                                            const std::vector<double>& head,
                                            const std::vector<double>& bias) {
  const size_t dim = rep.size(), T = bias.size();
  if (head.size() != dim * T)
    throw std::invalid_argument("span_label_probs: head dimension mismatch");
  std::vector<double> p(T);
  for (size_t t = 0; t < T; ++t) {
    double z = bias[t];
    for (size_t j = 0; j < dim; ++j) z += rep[j] * head[j * T + t];
    p[t] = sigmoid(z);
  }
  return p;
}

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy with probability clamping for stability.
inline double bce_loss(const std::vector<double>& probs, const std::vector<uint8_t>& targets) {
  if (probs.size() != targets.size() || probs.empty())
    throw std::invalid_argument("bce_loss: size mismatch");
  double total = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    total += targets[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.size());
}

struct SpanTrainConfig {
  int embedding_dim = 24;
  int max_span_width = 8;
  int context_window = 2;
  double learning_rate = 1e-3;             // head and attention components
  double embedding_learning_rate = 5e-5;   // embedder rate
  double weight_decay = 1e-2;
  int batch_size = 6;
  int epochs = 10;
  uint64_t seed = 0;
  double threshold = 0.5;
  double negative_sample_rate = 1.0;  // 1.0 = every enumerated span contributes
};

struct SpanPrediction {
  Span span;
  std::string label;
  std::string role;
  double probability = 0.0;
};

// Span labeling model: trained token embeddings, a window-mean
// contextualizer, a global attention vector for span pooling and a
// multi-label sigmoid head.
struct SpanModel {
  std::vector<std::string> vocab;  // sorted; row index = position, unknown = vocab.size()
  std::vector<double> embeddings;  // (V+1) x d
  std::vector<double> attention;   // d
  std::vector<double> head;        // d x T
  std::vector<double> bias;        // T
  int dim = 0;
  int max_span_width = 8;
  int context_window = 2;
  double threshold = 0.5;
  std::string schema_fingerprint;
  std::vector<std::pair<std::string, std::string>> label_roles;  // T entries
  SpanTrainConfig config;

  size_t num_labels() const { return bias.size(); }

  size_t token_row(const std::string& token) const {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), token);
    if (it != vocab.end() && *it == token)
      return static_cast<size_t>(it - vocab.begin());
    return vocab.size();  // unknown row
  }

  // c_i = e_i + mean of embeddings in the +-window around i (center
  // excluded); bare e_i when the window is empty.
  std::vector<double> contextualize(const std::vector<std::string>& tokens) const {
    const size_t n = tokens.size(), d = static_cast<size_t>(dim);
    std::vector<size_t> rows(n);
    for (size_t i = 0; i < n; ++i) rows[i] = token_row(tokens[i]);
    std::vector<double> ctx(n * d, 0.0);
    for (size_t i = 0; i < n; ++i) {
      const double* e = &embeddings[rows[i] * d];
      double* c = &ctx[i * d];
      for (size_t j = 0; j < d; ++j) c[j] = e[j];
      const long lo = std::max<long>(0, static_cast<long>(i) - context_window);
      const long hi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(i) + context_window);
      const long count = hi - lo + 1 - 1;  // window excludes the center
      if (count <= 0) continue;
      for (long k = lo; k <= hi; ++k) {
        if (k == static_cast<long>(i)) continue;
        const double* ek = &embeddings[rows[static_cast<size_t>(k)] * d];
        for (size_t j = 0; j < d; ++j) c[j] += ek[j] / static_cast<double>(count);
      }
    }
    return ctx;
  }
};

struct SpanGradient {
  std::vector<double> embeddings;
  std::vector<double> attention;
  std::vector<double> head;
  std::vector<double> bias;

  void init(const SpanModel& m) {
    embeddings.assign(m.embeddings.size(), 0.0);
    attention.assign(m.attention.size(), 0.0);
    head.assign(m.head.size(), 0.0);
    bias.assign(m.bias.size(), 0.0);
  }

  void add(const SpanGradient& o) {
    for (size_t i = 0; i < embeddings.size(); ++i) embeddings[i] += o.embeddings[i];
    for (size_t i = 0; i < attention.size(); ++i) attention[i] += o.attention[i];
    for (size_t i = 0; i < head.size(); ++i) head[i] += o.head[i];
    for (size_t i = 0; i < bias.size(); ++i) bias[i] += o.bias[i];
  }

  void scale(double f) {
    for (auto& x : embeddings) x *= f;
    for (auto& x : attention) x *= f;
    for (auto& x : head) x *= f;
    for (auto& x : bias) x *= f;
  }
};

// One document's mean BCE over the included spans, with the full gradient
// (embeddings, attention vector, head, bias). targets is span-major:
// targets[s * T + t]; include[s] masks spans kept by negative sampling.
inline double span_loss_and_gradient(const SpanModel& model,
                                     const std::vector<std::string>& tokens,
                                     const std::vector<Span>& spans,
                                     const std::vector<uint8_t>& targets,
                                     const std::vector<uint8_t>& include, SpanGradient& grad) {
  const size_t n = tokens.size();
  const size_t d = static_cast<size_t>(model.dim);
  const size_t T = model.num_labels();
  grad.init(model);

  size_t included = 0;
  for (size_t s = 0; s < spans.size(); ++s)
    if (include[s]) ++included;
  if (included == 0) return 0.0;
  const double inv_count = 1.0 / (static_cast<double>(included) * static_cast<double>(T));

  std::vector<size_t> rows(n);
  for (size_t i = 0; i < n; ++i) rows[i] = model.token_row(tokens[i]);
  std::vector<double> ctx = model.contextualize(tokens);

  // Global attention scores a_i = c_i . M.
  std::vector<double> scores(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) scores[i] += ctx[i * d + j] * model.attention[j];

  std::vector<double> dctx(n * d, 0.0);
  std::vector<double> dscores(n, 0.0);
  double loss = 0.0;

  std::vector<double> span_scores, w, rep(d), dlogit(T), drep(d), dw;
  for (size_t s = 0; s < spans.size(); ++s) {
    if (!include[s]) continue;
    const Span span = spans[s];
    const size_t width = static_cast<size_t>(span.width());
    span_scores.assign(scores.begin() + span.start, scores.begin() + span.end);
    w = attention_weights(span_scores);
    std::fill(rep.begin(), rep.end(), 0.0);
    for (size_t k = 0; k < width; ++k) {
      const double* c = &ctx[(static_cast<size_t>(span.start) + k) * d];
      for (size_t j = 0; j < d; ++j) rep[j] += w[k] * c[j];
    }

    for (size_t t = 0; t < T; ++t) {
      double z = model.bias[t];
      for (size_t j = 0; j < d; ++j) z += rep[j] * model.head[j * T + t];
      const double p = sigmoid(z);
      const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
      const double y = targets[s * T + t] ? 1.0 : 0.0;
      loss += (y > 0.5 ? -std::log(pc) : -std::log(1.0 - pc)) * inv_count;
      // Flat where the clamp is active.
      dlogit[t] = (p > kProbClamp && p < 1.0 - kProbClamp) ? (p - y) * inv_count : 0.0;
    }

    std::fill(drep.begin(), drep.end(), 0.0);
    for (size_t t = 0; t < T; ++t) {
      if (dlogit[t] == 0.0) continue;
      grad.bias[t] += dlogit[t];
      for (size_t j = 0; j < d; ++j) {
        grad.head[j * T + t] += rep[j] * dlogit[t];
        drep[j] += model.head[j * T + t] * dlogit[t];
      }
    }

    // rep = sum_k w_k c_k: direct path to c, softmax path to the scores.
    dw.assign(width, 0.0);
    double wdot = 0.0;
    for (size_t k = 0; k < width; ++k) {
      const size_t idx = (static_cast<size_t>(span.start) + k) * d;
      for (size_t j = 0; j < d; ++j) {
        dctx[idx + j] += w[k] * drep[j];
        dw[k] += ctx[idx + j] * drep[j];
      }
      wdot += w[k] * dw[k];
    }
    for (size_t k = 0; k < width; ++k)
      dscores[static_cast<size_t>(span.start) + k] += w[k] * (dw[k] - wdot);
  }

  // a_i = c_i . M
  for (size_t i = 0; i < n; ++i) {
    if (dscores[i] == 0.0) continue;
    for (size_t j = 0; j < d; ++j) {
      grad.attention[j] += dscores[i] * ctx[i * d + j];
      dctx[i * d + j] += dscores[i] * model.attention[j];
    }
  }

  // Contextualizer: c_i = e_i + mean of neighbours.
  for (size_t i = 0; i < n; ++i) {
    const double* dc = &dctx[i * d];
    double* de = &grad.embeddings[rows[i] * d];
    for (size_t j = 0; j < d; ++j) de[j] += dc[j];
    const long lo = std::max<long>(0, static_cast<long>(i) - model.context_window);
    const long hi =
        std::min<long>(static_cast<long>(n) - 1, static_cast<long>(i) + model.context_window);
    const long count = hi - lo;
    if (count <= 0) continue;
    for (long k = lo; k <= hi; ++k) {
      if (k == static_cast<long>(i)) continue;
      double* dek = &grad.embeddings[rows[static_cast<size_t>(k)] * d];
      for (size_t j = 0; j < d; ++j) dek[j] += dc[j] / static_cast<double>(count);
    }
  }
  return loss;
}

// Span-major gold bits for one document: 1 for every (attribute span,
// label x role) pair of the gold relations. Shared spans keep every bit --
// multi-label targets carry what the tagging scheme must drop.
inline std::vector<uint8_t> span_targets(const Document& doc, const Schema& schema,
                                         const SpanLabelSet& label_set,
                                         const std::vector<Span>& spans) {
  std::vector<uint8_t> targets(spans.size() * label_set.size(), 0);
  std::map<Span, size_t> span_index;
  for (size_t s = 0; s < spans.size(); ++s) span_index[spans[s]] = s;
  for (const auto& rel : doc.relations) {
    for (const auto& a : rel.attributes) {
      auto it = span_index.find(a.span);
      if (it == span_index.end()) continue;  // wider than the span budget
      int t = label_set.index_of(rel.label, a.role);
      if (t < 0) throw std::runtime_error("span_targets: (" + rel.label + ", " + a.role +
                                          ") not in the schema label set");
      targets[it->second * label_set.size() + static_cast<size_t>(t)] = 1;
    }
  }
  return targets;
}

inline SpanModel train_span(const std::vector<Document>& corpus, const Schema& schema,
                            const SpanTrainConfig& config, TrainLog* log = nullptr) {
  if (corpus.empty()) throw ConfigError("train: corpus is empty");
  if (config.embedding_dim < 1) throw ConfigError("train: embedding dim must be >= 1");
  if (config.max_span_width < 1) throw ConfigError("train: max span width must be >= 1");
  if (config.batch_size < 1) throw ConfigError("train: batchSize must be >= 1");

  SpanLabelSet label_set(schema);
  const size_t T = label_set.size();
  const size_t d = static_cast<size_t>(config.embedding_dim);

  SpanModel model;
  model.config = config;
  model.dim = config.embedding_dim;
  model.max_span_width = config.max_span_width;
  model.context_window = config.context_window;
  model.threshold = config.threshold;
  model.schema_fingerprint = schema.fingerprint();
  for (const auto& e : label_set.entries()) model.label_roles.push_back({e.label, e.role});

  {
    std::vector<std::string> vocab;
    for (const auto& doc : corpus)
      for (const auto& tok : doc.tokens) vocab.push_back(tok);
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    model.vocab = std::move(vocab);
  }

  Rng rng(config.seed);
  model.embeddings.resize((model.vocab.size() + 1) * d);
  for (auto& x : model.embeddings) x = 0.1 * rng.next_gaussian();
  model.attention.resize(d);
  for (auto& x : model.attention) x = 0.1 * rng.next_gaussian();
  model.head.assign(d * T, 0.0);
  model.bias.assign(T, 0.0);

  // Per-document spans, targets and sampling masks are fixed across epochs.
  std::vector<std::vector<Span>> spans(corpus.size());
  std::vector<std::vector<uint8_t>> targets(corpus.size());
  std::vector<std::vector<uint8_t>> include(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    spans[i] = enumerate_spans(corpus[i].token_count(), config.max_span_width);
    targets[i] = span_targets(corpus[i], schema, label_set, spans[i]);
    include[i].assign(spans[i].size(), 1);
    if (config.negative_sample_rate < 1.0) {
      for (size_t s = 0; s < spans[i].size(); ++s) {
        bool positive = false;
        for (size_t t = 0; t < T; ++t) positive |= targets[i][s * T + t] != 0;
        if (positive) continue;
        uint64_t h = fnv1a64(corpus[i].id + "#" + std::to_string(s),
                             0x9e3779b97f4a7c15ull ^ config.seed);
        double u = static_cast<double>(h >> 11) * 0x1.0p-53;
        include[i][s] = u < config.negative_sample_rate ? 1 : 0;
      }
    }
  }

  AdamW emb_opt(model.embeddings.size(), config.embedding_learning_rate, config.weight_decay);
  AdamW att_opt(model.attention.size(), config.learning_rate, config.weight_decay);
  AdamW head_opt(model.head.size(), config.learning_rate, config.weight_decay);
  AdamW bias_opt(model.bias.size(), config.learning_rate, config.weight_decay);

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  SpanGradient batch_grad, doc_grad;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(config.batch_size)) {
      size_t end = std::min(order.size(), begin + static_cast<size_t>(config.batch_size));
      batch_grad.init(model);
      for (size_t i = begin; i < end; ++i) {
        size_t doc = order[i];
        epoch_loss += span_loss_and_gradient(model, corpus[doc].tokens, spans[doc], targets[doc],
                                             include[doc], doc_grad);
        batch_grad.add(doc_grad);
      }
      batch_grad.scale(1.0 / static_cast<double>(end - begin));
      emb_opt.begin_step();
      att_opt.begin_step();
      head_opt.begin_step();
      bias_opt.begin_step();
      emb_opt.update(model.embeddings, batch_grad.embeddings);
      att_opt.update(model.attention, batch_grad.attention);
      head_opt.update(model.head, batch_grad.head);
      bias_opt.update(model.bias, batch_grad.bias);
    }
    if (log != nullptr) log->epoch_losses.push_back(epoch_loss / static_cast<double>(corpus.size()));
  }
  return model;
}

// All (span, label, role) with p >= threshold; a span may carry several
// labels. Sorted by (span, label-set order).
inline std::vector<SpanPrediction> predict_spans(const SpanModel& model, const Document& doc,
                                                 const Schema& schema, double threshold) {
  if (model.schema_fingerprint != schema.fingerprint())
    throw ConfigError("predict: model schema fingerprint " + model.schema_fingerprint +
                      " does not match schema " + schema.fingerprint());
  const size_t d = static_cast<size_t>(model.dim);
  const size_t T = model.num_labels();
  std::vector<double> ctx = model.contextualize(doc.tokens);
  std::vector<SpanPrediction> out;
  for (const Span& span : enumerate_spans(doc.token_count(), model.max_span_width)) {
    std::vector<double> rep =
        span_representation(ctx, doc.tokens.size(), d, span, model.attention);
    std::vector<double> probs = span_label_probs(rep, model.head, model.bias);
    for (size_t t = 0; t < T; ++t)
      if (probs[t] >= threshold)
        out.push_back({span, model.label_roles[t].first, model.label_roles[t].second, probs[t]});
  }
  return out;
}

inline std::vector<SpanPrediction> predict_spans(const SpanModel& model, const Document& doc,
                                                 const Schema& schema) {
  return predict_spans(model, doc, schema, model.threshold);
}

}  // namespace mare
