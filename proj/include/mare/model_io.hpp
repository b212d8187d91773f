#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mare/crf.hpp"
#include "mare/span_labeler.hpp"

namespace mare {

// Model artifact container: magic, version, a JSON header with everything
// needed to reconstruct the model shape, then raw little-endian double
// arrays. Fully self-describing; predict needs no side files. Doubles are
// written verbatim, so identical training runs produce identical bytes.

inline constexpr char kArtifactMagic[8] = {'M', 'A', 'R', 'E', 'A', 'R', 'T', '1'};
inline constexpr uint32_t kArtifactVersion = 1;

namespace detail {

inline void write_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("model artifact: truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void write_doubles(std::ostream& out, const std::vector<double>& xs) {
  write_u64(out, xs.size());
  if (!xs.empty())
    out.write(reinterpret_cast<const char*>(xs.data()),
              static_cast<std::streamsize>(xs.size() * sizeof(double)));
}

inline std::vector<double> read_doubles(std::istream& in) {
  uint64_t n = read_u64(in);
  std::vector<double> xs(n);
  if (n > 0)
    in.read(reinterpret_cast<char*>(xs.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("model artifact: truncated array");
  return xs;
}

inline void write_header(std::ostream& out, char kind, const nlohmann::ordered_json& header) {
  out.write(kArtifactMagic, 8);
  uint32_t version = kArtifactVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.put(kind);
  std::string dump = header.dump();
  write_u64(out, dump.size());
  out.write(dump.data(), static_cast<std::streamsize>(dump.size()));
}

inline nlohmann::json read_header(std::istream& in, char expected_kind) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kArtifactMagic, 8) != 0)
    throw std::runtime_error("model artifact: bad magic");
  uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != kArtifactVersion)
    throw std::runtime_error("model artifact: unsupported version " + std::to_string(version));
  int kind = in.get();
  if (kind != expected_kind)
    throw std::runtime_error(std::string("model artifact: expected kind '") + expected_kind +
                             "', found '" + static_cast<char>(kind) + "'");
  uint64_t len = read_u64(in);
  std::string dump(len, '\0');
  in.read(dump.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("model artifact: truncated header");
  return nlohmann::json::parse(dump);
}

}  // namespace detail

inline char artifact_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("model artifact: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kArtifactMagic, 8) != 0)
    throw std::runtime_error("model artifact: bad magic in " + path);
  in.seekg(12);
  int kind = in.get();
  if (kind != 's' && kind != 'p')
    throw std::runtime_error("model artifact: unknown kind in " + path);
  return static_cast<char>(kind);
}

inline void save_crf_model(const std::string& path, const CrfModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("model artifact: cannot write " + path);
  nlohmann::ordered_json h;
  h["approach"] = "seq";
  h["schemaFingerprint"] = model.schema_fingerprint;
  h["tagSet"] = model.tag_names;
  h["hashSpace"] = model.hash_space;
  h["numTags"] = model.num_tags;
  h["config"] = {{"learningRate", model.config.learning_rate},
                 {"weightDecay", model.config.weight_decay},
                 {"batchSize", model.config.batch_size},
                 {"epochs", model.config.epochs},
                 {"seed", model.config.seed},
                 {"hashSpace", model.config.hash_space}};
  detail::write_header(out, 's', h);
  detail::write_doubles(out, model.emission_weights);
  detail::write_doubles(out, model.transition);
  detail::write_doubles(out, model.start);
  detail::write_doubles(out, model.end);
  if (!out) throw std::runtime_error("model artifact: write failed for " + path);
}

inline CrfModel load_crf_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("model artifact: cannot open " + path);
  nlohmann::json h = detail::read_header(in, 's');
  CrfModel m;
  m.schema_fingerprint = h.at("schemaFingerprint").get<std::string>();
  m.tag_names = h.at("tagSet").get<std::vector<std::string>>();
  m.hash_space = h.at("hashSpace").get<uint32_t>();
  m.num_tags = h.at("numTags").get<size_t>();
  const auto& c = h.at("config");
  m.config.learning_rate = c.at("learningRate").get<double>();
  m.config.weight_decay = c.at("weightDecay").get<double>();
  m.config.batch_size = c.at("batchSize").get<int>();
  m.config.epochs = c.at("epochs").get<int>();
  m.config.seed = c.at("seed").get<uint64_t>();
  m.config.hash_space = c.at("hashSpace").get<uint32_t>();
  m.emission_weights = detail::read_doubles(in);
  m.transition = detail::read_doubles(in);
  m.start = detail::read_doubles(in);
  m.end = detail::read_doubles(in);
  if (m.emission_weights.size() != static_cast<size_t>(m.hash_space) * m.num_tags ||
      m.transition.size() != m.num_tags * m.num_tags || m.start.size() != m.num_tags ||
      m.end.size() != m.num_tags)
    throw std::runtime_error("model artifact: inconsistent dimensions in " + path);
  return m;
}

inline void save_span_model(const std::string& path, const SpanModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("model artifact: cannot write " + path);
  nlohmann::ordered_json h;
  h["approach"] = "span";
  h["schemaFingerprint"] = model.schema_fingerprint;
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& [label, role] : model.label_roles) pairs.push_back({{"label", label}, {"role", role}});
  h["labelRoles"] = std::move(pairs);
  h["vocab"] = model.vocab;
  h["dim"] = model.dim;
  h["maxSpanWidth"] = model.max_span_width;
  h["contextWindow"] = model.context_window;
  h["threshold"] = model.threshold;
  h["config"] = {{"embeddingDim", model.config.embedding_dim},
                 {"maxSpanWidth", model.config.max_span_width},
                 {"contextWindow", model.config.context_window},
                 {"learningRate", model.config.learning_rate},
                 {"embeddingLearningRate", model.config.embedding_learning_rate},
                 {"weightDecay", model.config.weight_decay},
                 {"batchSize", model.config.batch_size},
                 {"epochs", model.config.epochs},
                 {"seed", model.config.seed},
                 {"threshold", model.config.threshold},
                 {"negativeSampleRate", model.config.negative_sample_rate}};
  detail::write_header(out, 'p', h);
  detail::write_doubles(out, model.embeddings);
  detail::write_doubles(out, model.attention);
  detail::write_doubles(out, model.head);
  detail::write_doubles(out, model.bias);
  if (!out) throw std::runtime_error("model artifact: write failed for " + path);
}

inline SpanModel load_span_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("model artifact: cannot open " + path);
  nlohmann::json h = detail::read_header(in, 'p');
  SpanModel m;
  m.schema_fingerprint = h.at("schemaFingerprint").get<std::string>();
  for (const auto& jp : h.at("labelRoles"))
    m.label_roles.push_back({jp.at("label").get<std::string>(), jp.at("role").get<std::string>()});
  m.vocab = h.at("vocab").get<std::vector<std::string>>();
  m.dim = h.at("dim").get<int>();
  m.max_span_width = h.at("maxSpanWidth").get<int>();
  m.context_window = h.at("contextWindow").get<int>();
  m.threshold = h.at("threshold").get<double>();
  const auto& c = h.at("config");
  m.config.embedding_dim = c.at("embeddingDim").get<int>();
  m.config.max_span_width = c.at("maxSpanWidth").get<int>();
  m.config.context_window = c.at("contextWindow").get<int>();
  m.config.learning_rate = c.at("learningRate").get<double>();
  m.config.embedding_learning_rate = c.at("embeddingLearningRate").get<double>();
  m.config.weight_decay = c.at("weightDecay").get<double>();
  m.config.batch_size = c.at("batchSize").get<int>();
  m.config.epochs = c.at("epochs").get<int>();
  m.config.seed = c.at("seed").get<uint64_t>();
  m.config.threshold = c.at("threshold").get<double>();
  m.config.negative_sample_rate = c.at("negativeSampleRate").get<double>();
  m.embeddings = detail::read_doubles(in);
  m.attention = detail::read_doubles(in);
  m.head = detail::read_doubles(in);
  m.bias = detail::read_doubles(in);
  const size_t d = static_cast<size_t>(m.dim);
  if (m.embeddings.size() != (m.vocab.size() + 1) * d || m.attention.size() != d ||
      m.head.size() != d * m.label_roles.size() || m.bias.size() != m.label_roles.size())
    throw std::runtime_error("model artifact: inconsistent dimensions in " + path);
  return m;
}

}  // namespace mare
