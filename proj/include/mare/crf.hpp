#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mare/features.hpp"

namespace mare {

inline double log_sum_exp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Linear-chain potentials for one sequence: per-token emission scores plus
// shared transition/start/end scores. Path score is
// start[y_0] + sum_t em[t][y_t] + sum_t tr[y_t][y_{t+1}] + end[y_{n-1}].
struct Potentials {
  size_t n = 0;
  size_t num_tags = 0;
  std::vector<double> emission;    // n x K
  std::vector<double> transition;  // K x K
  std::vector<double> start;       // K
  std::vector<double> end;         // K

  Potentials() = default;
  Potentials(size_t n_, size_t k_)
      : n(n_),
        num_tags(k_),
        emission(n_ * k_, 0.0),
        transition(k_ * k_, 0.0),
        start(k_, 0.0),
        end(k_, 0.0) {}

  double& em(size_t t, size_t k) { return emission[t * num_tags + k]; }
  double em(size_t t, size_t k) const { return emission[t * num_tags + k]; }
  double& tr(size_t j, size_t k) { return transition[j * num_tags + k]; }
  double tr(size_t j, size_t k) const { return transition[j * num_tags + k]; }

  // Addition order mirrors the Viterbi recursion so equal paths produce
  // bit-identical scores.
  double path_score(const std::vector<int>& y) const {
    double s = start[static_cast<size_t>(y[0])] + em(0, static_cast<size_t>(y[0]));
    for (size_t t = 1; t < n; ++t) {
      s += tr(static_cast<size_t>(y[t - 1]), static_cast<size_t>(y[t]));
      s += em(t, static_cast<size_t>(y[t]));
    }
    return s + end[static_cast<size_t>(y[n - 1])];
  }
};

// log sum over all K^n paths of exp(path score), in log space.
inline double forward_log_partition(const Potentials& p) {
  const size_t n = p.n, K = p.num_tags;
  if (n == 0) throw std::invalid_argument("forward_log_partition: empty sequence");
  std::vector<double> alpha(K), next(K), terms(K);
  for (size_t k = 0; k < K; ++k) alpha[k] = p.start[k] + p.em(0, k);
  for (size_t t = 1; t < n; ++t) {
    for (size_t k = 0; k < K; ++k) {
      for (size_t j = 0; j < K; ++j) terms[j] = alpha[j] + p.tr(j, k);
      next[k] = log_sum_exp(terms) + p.em(t, k);
    }
    alpha.swap(next);
  }
  for (size_t k = 0; k < K; ++k) terms[k] = alpha[k] + p.end[k];
  return log_sum_exp(terms);
}

struct ViterbiResult {
  std::vector<int> tags;
  double score = 0.0;
};

// Max-score path; ties resolve to the lowest tag index at every backtrack
// step (strict-greater updates while scanning ascending indices).
inline ViterbiResult viterbi(const Potentials& p) {
  const size_t n = p.n, K = p.num_tags;
  if (n == 0) throw std::invalid_argument("viterbi: empty sequence");
  std::vector<double> delta(K), next(K);
  std::vector<std::vector<int>> back(n, std::vector<int>(K, 0));
  for (size_t k = 0; k < K; ++k) delta[k] = p.start[k] + p.em(0, k);
  for (size_t t = 1; t < n; ++t) {
    for (size_t k = 0; k < K; ++k) {
      double best = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (size_t j = 0; j < K; ++j) {
        double s = delta[j] + p.tr(j, k);
        if (s > best) {
          best = s;
          arg = static_cast<int>(j);
        }
      }
      next[k] = best + p.em(t, k);
      back[t][k] = arg;
    }
    delta.swap(next);
  }
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (size_t k = 0; k < K; ++k) {
    double s = delta[k] + p.end[k];
    if (s > best) {
      best = s;
      arg = static_cast<int>(k);
    }
  }
  ViterbiResult r;
  r.score = best;
  r.tags.assign(n, 0);
  r.tags[n - 1] = arg;
  for (size_t t = n - 1; t > 0; --t) r.tags[t - 1] = back[t][static_cast<size_t>(r.tags[t])];
  return r;
}

// Forward-backward marginals. unary[t*K+k] = P(y_t = k); pairwise holds
// P(y_t = j, y_{t+1} = k) for t in [0, n-1).
struct Marginals {
  size_t n = 0;
  size_t num_tags = 0;
  double log_partition = 0.0;
  std::vector<double> unary;     // n x K
  std::vector<double> pairwise;  // (n-1) x K x K
};

inline Marginals forward_backward(const Potentials& p) {
  const size_t n = p.n, K = p.num_tags;
  std::vector<double> alpha(n * K), beta(n * K), terms(K);
  for (size_t k = 0; k < K; ++k) alpha[k] = p.start[k] + p.em(0, k);
  for (size_t t = 1; t < n; ++t)
    for (size_t k = 0; k < K; ++k) {
      for (size_t j = 0; j < K; ++j) terms[j] = alpha[(t - 1) * K + j] + p.tr(j, k);
      alpha[t * K + k] = log_sum_exp(terms) + p.em(t, k);
    }
  for (size_t k = 0; k < K; ++k) beta[(n - 1) * K + k] = p.end[k];
  for (size_t t = n - 1; t > 0; --t)
    for (size_t j = 0; j < K; ++j) {
      for (size_t k = 0; k < K; ++k)
        terms[k] = p.tr(j, k) + p.em(t, k) + beta[t * K + k];
      beta[(t - 1) * K + j] = log_sum_exp(terms);
    }
  for (size_t k = 0; k < K; ++k) terms[k] = alpha[(n - 1) * K + k] + p.end[k];
  const double log_z = log_sum_exp(terms);

  Marginals m;
  m.n = n;
  m.num_tags = K;
  m.log_partition = log_z;
  m.unary.resize(n * K);
  for (size_t t = 0; t < n; ++t)
    for (size_t k = 0; k < K; ++k)
      m.unary[t * K + k] = std::exp(alpha[t * K + k] + beta[t * K + k] - log_z);
  m.pairwise.resize(n > 1 ? (n - 1) * K * K : 0);
  for (size_t t = 0; t + 1 < n; ++t)
    for (size_t j = 0; j < K; ++j)
      for (size_t k = 0; k < K; ++k)
        m.pairwise[(t * K + j) * K + k] = std::exp(alpha[t * K + j] + p.tr(j, k) +
                                                   p.em(t + 1, k) + beta[(t + 1) * K + k] - log_z);
  return m;
}

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-2;
  int batch_size = 6;
  int epochs = 10;
  uint64_t seed = 0;
  uint32_t hash_space = kDefaultHashSpace;
};

// Feature-hashed linear-chain CRF. Emission scores are dot products of
// hashed sparse features with per-tag weight rows; transitions are dense.
struct CrfModel {
  uint32_t hash_space = kDefaultHashSpace;
  size_t num_tags = 0;
  std::vector<double> emission_weights;  // hash_space x K
  std::vector<double> transition;        // K x K
  std::vector<double> start;             // K
  std::vector<double> end;               // K
  std::string schema_fingerprint;
  std::vector<std::string> tag_names;
  TrainConfig config;

  static CrfModel zeros(uint32_t hash_space, size_t num_tags) {
    CrfModel m;
    m.hash_space = hash_space;
    m.num_tags = num_tags;
    m.emission_weights.assign(static_cast<size_t>(hash_space) * num_tags, 0.0);
    m.transition.assign(num_tags * num_tags, 0.0);
    m.start.assign(num_tags, 0.0);
    m.end.assign(num_tags, 0.0);
    return m;
  }

  double& emission_at(uint32_t feature, size_t tag) {
    return emission_weights[static_cast<size_t>(feature) * num_tags + tag];
  }
  double emission_at(uint32_t feature, size_t tag) const {
    return emission_weights[static_cast<size_t>(feature) * num_tags + tag];
  }
};

using FeatureSequence = std::vector<std::vector<uint32_t>>;

// emission[t][k] = sum over active features of emissionWeights[f][k].
inline Potentials score_potentials(const CrfModel& model, const FeatureSequence& features) {
  const size_t K = model.num_tags;
  if (K == 0) throw std::invalid_argument("score_potentials: model has no tags");
  Potentials p(features.size(), K);
  for (size_t t = 0; t < features.size(); ++t) {
    for (uint32_t f : features[t]) {
      if (f >= model.hash_space)
        throw std::invalid_argument("score_potentials: feature id outside hash space");
      const double* row = &model.emission_weights[static_cast<size_t>(f) * K];
      double* out = &p.emission[t * K];
      for (size_t k = 0; k < K; ++k) out[k] += row[k];
    }
  }
  p.transition = model.transition;
  p.start = model.start;
  p.end = model.end;
  return p;
}

// Gradient of the NLL with respect to every weight group. Emission rows are
// sparse (only features present in the sequence can have nonzero entries);
// the ordered map keeps accumulation deterministic.
struct CrfGradient {
  std::map<uint32_t, std::vector<double>> emission_rows;  // feature -> K entries
  std::vector<double> transition;                         // K x K
  std::vector<double> start;                              // K
  std::vector<double> end;                                // K

  void init(size_t num_tags) {
    transition.assign(num_tags * num_tags, 0.0);
    start.assign(num_tags, 0.0);
    end.assign(num_tags, 0.0);
    emission_rows.clear();
  }

  void add(const CrfGradient& other) {
    for (size_t i = 0; i < transition.size(); ++i) transition[i] += other.transition[i];
    for (size_t i = 0; i < start.size(); ++i) start[i] += other.start[i];
    for (size_t i = 0; i < end.size(); ++i) end[i] += other.end[i];
    for (const auto& [f, row] : other.emission_rows) {
      auto& mine = emission_rows[f];
      if (mine.empty()) mine.assign(row.size(), 0.0);
      for (size_t k = 0; k < row.size(); ++k) mine[k] += row[k];
    }
  }

  void scale(double factor) {
    for (auto& x : transition) x *= factor;
    for (auto& x : start) x *= factor;
    for (auto& x : end) x *= factor;
    for (auto& [f, row] : emission_rows)
      for (auto& x : row) x *= factor;
  }
};

// loss = log Z - gold path score; gradient = expected counts - gold counts.
inline double nll_and_gradient(const CrfModel& model, const FeatureSequence& features,
                               const std::vector<int>& gold, CrfGradient& grad) {
  const size_t n = features.size(), K = model.num_tags;
  if (gold.size() != n) throw std::invalid_argument("nll_and_gradient: gold length mismatch");
  Potentials p = score_potentials(model, features);
  Marginals m = forward_backward(p);
  const double gold_score = p.path_score(gold);
  const double loss = m.log_partition - gold_score;

  grad.init(K);
  for (size_t t = 0; t < n; ++t) {
    for (size_t k = 0; k < K; ++k) {
      double g = m.unary[t * K + k] - (static_cast<size_t>(gold[t]) == k ? 1.0 : 0.0);
      if (g == 0.0) continue;
      for (uint32_t f : features[t]) {
        auto& row = grad.emission_rows[f];
        if (row.empty()) row.assign(K, 0.0);
        row[k] += g;
      }
    }
  }
  for (size_t t = 0; t + 1 < n; ++t)
    for (size_t j = 0; j < K; ++j)
      for (size_t k = 0; k < K; ++k) grad.transition[j * K + k] += m.pairwise[(t * K + j) * K + k];
  for (size_t t = 0; t + 1 < n; ++t)
    grad.transition[static_cast<size_t>(gold[t]) * K + static_cast<size_t>(gold[t + 1])] -= 1.0;
  for (size_t k = 0; k < K; ++k) {
    grad.start[k] = m.unary[k] - (static_cast<size_t>(gold[0]) == k ? 1.0 : 0.0);
    grad.end[k] =
        m.unary[(n - 1) * K + k] - (static_cast<size_t>(gold[n - 1]) == k ? 1.0 : 0.0);
  }
  return loss;
}

}  // namespace mare
