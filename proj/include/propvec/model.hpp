#pragma once

#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "propvec/corpus.hpp"
#include "propvec/property_config.hpp"
#include "propvec/sgns.hpp"
#include "propvec/util.hpp"
#include "propvec/vectors.hpp"

namespace propvec {

// Model parameters: one input row per property key (or n-gram bucket) and
// one output row per retained context word.
struct Model {
  PropertyConfig config;
  uint32_t dim = 0;
  Vocabulary vocab;
  std::vector<float> input;
  std::vector<float> output;

  size_t input_rows() const {
    return config.mode == PropertyConfig::Mode::Ngrams
               ? size_t(config.buckets)
               : vocab.n_properties();
  }

  sgns::MatrixView<float> input_view() {
    return {input.data(), input_rows(), dim};
  }
  sgns::MatrixView<const float> input_view() const {
    return {input.data(), input_rows(), dim};
  }
  sgns::MatrixView<float> output_view() {
    return {output.data(), vocab.size(), dim};
  }
  sgns::MatrixView<const float> output_view() const {
    return {output.data(), vocab.size(), dim};
  }

  std::vector<float> compose(std::span<const uint32_t> ids) const {
    return sgns::compose(input_view(), ids, config.composition, dim);
  }

  float score(std::span<const uint32_t> props, uint32_t context_id) const {
    if (context_id >= vocab.size())
      throw std::out_of_range("invalid context id");
    auto v = compose(props);
    return sgns::dot(std::span<const float>(v),
                     std::span<const float>(output_view().row(context_id)));
  }

  float train_pair(std::span<const uint32_t> props, uint32_t context_id,
                   std::span<const uint32_t> negative_ids, float lr,
                   sgns::TrainScratch<float>& ws) {
    return sgns::train_pair(input_view(), output_view(), props, context_id,
                            negative_ids, lr, config.composition, ws);
  }

  float train_pair(std::span<const uint32_t> props, uint32_t context_id,
                   std::span<const uint32_t> negative_ids, float lr) {
    sgns::TrainScratch<float> ws;
    return train_pair(props, context_id, negative_ids, lr, ws);
  }

  bool operator==(const Model& o) const {
    return config == o.config && dim == o.dim && vocab == o.vocab &&
           input == o.input && output == o.output;
  }
};

// Input rows i.i.d. uniform on [-1/dim, +1/dim], output rows zero.
// Bit-reproducible from the seed.
inline Model init_model(Vocabulary vocab, const PropertyConfig& config,
                        uint32_t dim, uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  config.validate();
  Model m;
  m.config = config;
  m.dim = dim;
  m.vocab = std::move(vocab);
  m.input.resize(m.input_rows() * size_t(dim));
  m.output.assign(m.vocab.size() * size_t(dim), 0.0f);
  std::mt19937_64 gen(seed);
  double inv = 1.0 / double(dim);
  for (auto& x : m.input) {
    double u = double(gen() >> 40) * 0x1.0p-24;  // 24-bit uniform in [0,1)
    x = float((2.0 * u - 1.0) * inv);
  }
  return m;
}

namespace detail {

constexpr char kModelMagic[4] = {'P', 'V', 'E', 'C'};
constexpr uint32_t kModelVersion = 1;

inline void write_config(ByteWriter& w, const PropertyConfig& c,
                         uint32_t dim) {
  w.u8(uint8_t(c.mode));
  w.u8(c.props);
  w.u8(uint8_t(c.composition));
  w.u32(c.minn);
  w.u32(c.maxn);
  w.u64(c.buckets);
  w.u32(dim);
}

inline void write_vocab(ByteWriter& w, const Vocabulary& v) {
  w.u32(v.min_count());
  w.u64(v.total_tokens());
  w.u64(v.size());
  for (uint32_t i = 0; i < v.size(); ++i) {
    const auto& e = v.word(i);
    w.str(e.surface);
    w.u64(e.count);
    w.u32(uint32_t(e.analyses.size()));
    for (const auto& a : e.analyses) {
      w.str(a.lemma);
      w.str(a.tag.text());
      w.u64(a.count);
    }
  }
  w.u64(v.n_properties());
  for (uint32_t i = 0; i < v.n_properties(); ++i) w.str(v.property_key(i));
}

inline Vocabulary read_vocab(ByteReader& r) {
  uint32_t min_count = r.u32();
  uint64_t total = r.u64();
  uint64_t n_words = r.u64();
  std::vector<WordEntry> entries;
  entries.reserve(n_words);
  for (uint64_t i = 0; i < n_words; ++i) {
    WordEntry e;
    e.surface = r.str();
    e.count = r.u64();
    uint32_t n_an = r.u32();
    e.analyses.reserve(n_an);
    for (uint32_t j = 0; j < n_an; ++j) {
      Analysis a;
      a.lemma = r.str();
      a.tag = MorphTag::parse(r.str());
      a.count = r.u64();
      e.analyses.push_back(std::move(a));
    }
    entries.push_back(std::move(e));
  }
  uint64_t n_keys = r.u64();
  std::vector<std::string> keys;
  keys.reserve(n_keys);
  for (uint64_t i = 0; i < n_keys; ++i) keys.push_back(r.str());
  return Vocabulary::assemble(std::move(entries), std::move(keys), total,
                              min_count);
}

}  // namespace detail

// Binary model file: "PVEC" magic, version, config block, vocab block, both
// matrices as little-endian 32-bit floats, trailing FNV-1a-64 checksum over
// everything before it.
inline void save_model(const Model& m, const std::string& path) {
  ByteWriter w;
  w.raw(detail::kModelMagic, 4);
  w.u32(detail::kModelVersion);
  detail::write_config(w, m.config, m.dim);
  detail::write_vocab(w, m.vocab);
  w.u64(m.input.size());
  for (float x : m.input) w.f32(x);
  w.u64(m.output.size());
  for (float x : m.output) w.f32(x);
  w.u64(fnv1a64(w.data().data(), w.size()));
  write_file_atomic(path, w.data());
}

inline Model load_model(const std::string& path) {
  std::string bytes = read_file(path);
  if (bytes.size() < 16) throw std::runtime_error("truncated model file");
  if (std::string_view(bytes).substr(0, 4) !=
      std::string_view(detail::kModelMagic, 4))
    throw std::runtime_error("not a propvec model: " + path);
  uint64_t stored;
  ByteReader tail(std::string_view(bytes).substr(bytes.size() - 8));
  stored = tail.u64();
  if (fnv1a64(bytes.data(), bytes.size() - 8) != stored)
    throw std::runtime_error("model file checksum mismatch (corrupted file): " +
                             path);

  ByteReader r(std::string_view(bytes).substr(0, bytes.size() - 8));
  char magic[4];
  r.raw(magic, 4);
  uint32_t version = r.u32();
  if (version != detail::kModelVersion)
    throw std::runtime_error("unsupported model file version " +
                             std::to_string(version));
  Model m;
  m.config.mode = PropertyConfig::Mode(r.u8());
  m.config.props = r.u8();
  m.config.composition = Composition(r.u8());
  m.config.minn = r.u32();
  m.config.maxn = r.u32();
  m.config.buckets = r.u64();
  m.dim = r.u32();
  m.config.validate();
  m.vocab = detail::read_vocab(r);
  uint64_t n_in = r.u64();
  if (n_in != m.input_rows() * uint64_t(m.dim))
    throw std::runtime_error("model file matrix size mismatch");
  m.input.resize(n_in);
  for (auto& x : m.input) x = r.f32();
  uint64_t n_out = r.u64();
  if (n_out != m.vocab.size() * uint64_t(m.dim))
    throw std::runtime_error("model file matrix size mismatch");
  m.output.resize(n_out);
  for (auto& x : m.output) x = r.f32();
  if (r.remaining() != 0)
    throw std::runtime_error("trailing bytes in model file");
  return m;
}

// Property ids composing one retained word, using its most frequent
// (lemma, tag) analysis.
inline std::vector<uint32_t> word_property_ids(const Model& m,
                                               uint32_t word_id) {
  const WordEntry& e = m.vocab.word(word_id);
  Token t{e.surface, e.analyses.at(0).lemma, e.analyses.at(0).tag};
  return extract_properties(t, m.config, m.vocab);
}

// Composed vectors for every retained word, in vocabulary id order
// (descending count, ties lexicographic).
inline WordVectors word_vectors(const Model& m) {
  WordVectors wv;
  wv.dim = m.dim;
  wv.words.reserve(m.vocab.size());
  wv.data.reserve(m.vocab.size() * size_t(m.dim));
  for (uint32_t i = 0; i < m.vocab.size(); ++i) {
    auto v = m.compose(word_property_ids(m, i));
    wv.add(m.vocab.word(i).surface, v);
  }
  return wv;
}

// Text export of the composed word vectors; returns the number of words
// written. Values use %.9g, enough digits to round-trip a float exactly.
inline uint64_t export_word_vectors(const Model& m, const std::string& path) {
  std::string out;
  out.reserve(m.vocab.size() * (size_t(m.dim) * 12 + 16));
  out += std::to_string(m.vocab.size());
  out += ' ';
  out += std::to_string(m.dim);
  out += '\n';
  char buf[32];
  for (uint32_t i = 0; i < m.vocab.size(); ++i) {
    auto v = m.compose(word_property_ids(m, i));
    out += m.vocab.word(i).surface;
    for (float x : v) {
      int n = std::snprintf(buf, sizeof buf, " %.9g", double(x));
      out.append(buf, size_t(n));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
  return m.vocab.size();
}

}  // namespace propvec
