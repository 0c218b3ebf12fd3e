#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "propvec/morph.hpp"
#include "propvec/property_config.hpp"
#include "propvec/util.hpp"

namespace propvec {

struct ParseError : std::runtime_error {
  size_t line;

  ParseError(size_t line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
};

// One token of the tagged-corpus format: `surface|lemma|tag`, tag slots
// "."-separated. Surfaces and lemmas containing '|' or '.' are rejected
// rather than escaped.
inline Token parse_token(std::string_view field, size_t line_no, size_t col) {
  auto parts = split(field, '|');
  if (parts.size() != 3)
    throw ParseError(line_no, "token " + std::to_string(col) +
                                  ": expected 3 fields, got " +
                                  std::to_string(parts.size()) + " in '" +
                                  std::string(field) + "'");
  auto check = [&](std::string_view v, const char* what) {
    if (v.empty())
      throw ParseError(line_no,
                       "token " + std::to_string(col) + ": empty " + what);
    if (v.find('.') != std::string_view::npos)
      throw ParseError(line_no, "token " + std::to_string(col) + ": " + what +
                                    " may not contain '.'");
  };
  check(parts[0], "surface");
  check(parts[1], "lemma");
  Token t;
  t.surface = std::string(parts[0]);
  t.lemma = std::string(parts[1]);
  try {
    t.tag = MorphTag::parse(parts[2]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no,
                     "token " + std::to_string(col) + ": " + e.what());
  }
  return t;
}

// One sentence per line, tokens whitespace-separated. Blank lines are
// skipped; malformed tokens raise ParseError with line and token position.
template <typename Sink>
void parse_corpus(std::istream& in, Sink&& sink) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Sentence sent;
    size_t col = 0;
    size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) {
        ++col;
        sent.push_back(parse_token(
            std::string_view(line).substr(start, i - start), line_no, col));
      }
    }
    if (!sent.empty()) sink(std::move(sent));
  }
}

inline std::vector<Sentence> read_corpus(std::istream& in) {
  std::vector<Sentence> out;
  parse_corpus(in, [&](Sentence&& s) { out.push_back(std::move(s)); });
  return out;
}

inline std::vector<Sentence> read_corpus_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open corpus file: " + path);
  return read_corpus(f);
}

// Property keys are namespaced so a surface and an identical lemma string
// map to distinct vectors.
inline std::string surface_key(std::string_view s) {
  return "W:" + std::string(s);
}
inline std::string lemma_key(std::string_view s) { return "L:" + std::string(s); }
inline std::string tag_key(std::string_view s) { return "M:" + std::string(s); }

// One (lemma, tag) reading of a surface form, with its corpus frequency.
struct Analysis {
  std::string lemma;
  MorphTag tag;
  uint64_t count = 0;

  auto operator<=>(const Analysis&) const = default;
};

struct WordEntry {
  std::string surface;
  uint64_t count = 0;
  // Sorted by descending count, then (lemma, tag); analyses[0] is the most
  // frequent reading.
  std::vector<Analysis> analyses;

  auto operator<=>(const WordEntry&) const = default;
};

// Immutable after construction. Word ids are dense and ordered by
// descending count (ties lexicographic); property ids are dense in
// registration order (word id order, then that word's analyses).
class Vocabulary {
 public:
  Vocabulary() = default;

  size_t size() const { return words_.size(); }
  const WordEntry& word(uint32_t id) const { return words_.at(id); }
  const std::vector<WordEntry>& words() const { return words_; }
  uint64_t total_tokens() const { return total_tokens_; }
  uint32_t min_count() const { return min_count_; }

  std::optional<uint32_t> word_id(std::string_view surface) const {
    auto it = word_ids_.find(std::string(surface));
    if (it == word_ids_.end()) return std::nullopt;
    return it->second;
  }

  size_t n_properties() const { return property_keys_.size(); }
  const std::string& property_key(uint32_t id) const {
    return property_keys_.at(id);
  }
  const std::vector<std::string>& property_keys() const {
    return property_keys_;
  }

  std::optional<uint32_t> property_id(std::string_view key) const {
    auto it = property_ids_.find(std::string(key));
    if (it == property_ids_.end()) return std::nullopt;
    return it->second;
  }

  // Used by build_vocab and the model loader; entries must already be in
  // canonical id order.
  static Vocabulary assemble(std::vector<WordEntry> entries,
                             std::vector<std::string> property_keys,
                             uint64_t total_tokens, uint32_t min_count) {
    Vocabulary v;
    v.words_ = std::move(entries);
    v.property_keys_ = std::move(property_keys);
    v.total_tokens_ = total_tokens;
    v.min_count_ = min_count;
    v.word_ids_.reserve(v.words_.size());
    for (uint32_t i = 0; i < v.words_.size(); ++i)
      v.word_ids_.emplace(v.words_[i].surface, i);
    v.property_ids_.reserve(v.property_keys_.size());
    for (uint32_t i = 0; i < v.property_keys_.size(); ++i)
      v.property_ids_.emplace(v.property_keys_[i], i);
    return v;
  }

  // Canonical key registration for a finalized word list: W key per word,
  // then L/M keys per analysis in analysis order.
  static std::vector<std::string> register_keys(
      const std::vector<WordEntry>& entries) {
    std::vector<std::string> keys;
    std::unordered_map<std::string, uint32_t> seen;
    auto add = [&](std::string key) {
      if (seen.emplace(key, uint32_t(keys.size())).second)
        keys.push_back(std::move(key));
    };
    for (const auto& w : entries) {
      add(surface_key(w.surface));
      for (const auto& a : w.analyses) {
        add(lemma_key(a.lemma));
        add(tag_key(a.tag.text()));
      }
    }
    return keys;
  }

  bool operator==(const Vocabulary& o) const {
    return words_ == o.words_ && property_keys_ == o.property_keys_ &&
           total_tokens_ == o.total_tokens_ && min_count_ == o.min_count_;
  }

 private:
  std::vector<WordEntry> words_;
  std::unordered_map<std::string, uint32_t> word_ids_;
  std::vector<std::string> property_keys_;
  std::unordered_map<std::string, uint32_t> property_ids_;
  uint64_t total_tokens_ = 0;
  uint32_t min_count_ = 1;
};

class VocabBuilder {
 public:
  void add(const Sentence& sent) {
    ++sentences_;
    for (const auto& t : sent) {
      auto& w = counts_[t.surface];
      ++w.count;
      ++w.analyses[t.lemma + "|" + t.tag.text()];
    }
  }

  Vocabulary finish(uint32_t min_count) const {
    if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
    if (sentences_ == 0) throw std::runtime_error("no sentences");
    std::vector<WordEntry> entries;
    uint64_t total = 0;
    for (const auto& [surface, raw] : counts_) {
      if (raw.count < min_count) continue;
      WordEntry e;
      e.surface = surface;
      e.count = raw.count;
      for (const auto& [key, n] : raw.analyses) {
        auto parts = split(key, '|');
        e.analyses.push_back(
            {std::string(parts[0]), MorphTag::parse(parts[1]), n});
      }
      std::sort(e.analyses.begin(), e.analyses.end(),
                [](const Analysis& a, const Analysis& b) {
                  if (a.count != b.count) return a.count > b.count;
                  if (a.lemma != b.lemma) return a.lemma < b.lemma;
                  return a.tag < b.tag;
                });
      total += e.count;
      entries.push_back(std::move(e));
    }
    std::sort(entries.begin(), entries.end(),
              [](const WordEntry& a, const WordEntry& b) {
                if (a.count != b.count) return a.count > b.count;
                return a.surface < b.surface;
              });
    auto keys = Vocabulary::register_keys(entries);
    return Vocabulary::assemble(std::move(entries), std::move(keys), total,
                                min_count);
  }

 private:
  struct RawEntry {
    uint64_t count = 0;
    std::unordered_map<std::string, uint64_t> analyses;
  };

  std::unordered_map<std::string, RawEntry> counts_;
  size_t sentences_ = 0;
};

inline Vocabulary build_vocab(const std::vector<Sentence>& corpus,
                              uint32_t min_count) {
  VocabBuilder b;
  for (const auto& s : corpus) b.add(s);
  return b.finish(min_count);
}

// Character n-gram ids of `surface` wrapped as <surface>: every substring
// of byte length minn..maxn plus the whole wrapped word, each hashed with
// FNV-1a (32-bit) modulo `buckets`. Returned sorted and deduplicated.
inline std::vector<uint32_t> ngram_ids(std::string_view surface, uint32_t minn,
                                       uint32_t maxn, uint64_t buckets) {
  if (surface.empty()) throw std::invalid_argument("empty surface");
  if (minn < 1 || minn > maxn)
    throw std::invalid_argument("need 1 <= minn <= maxn");
  if (buckets < 1) throw std::invalid_argument("buckets must be >= 1");
  std::string wrapped = "<" + std::string(surface) + ">";
  std::vector<uint32_t> ids;
  for (size_t n = minn; n <= maxn && n <= wrapped.size(); ++n)
    for (size_t i = 0; i + n <= wrapped.size(); ++i)
      ids.push_back(uint32_t(fnv1a32(std::string_view(wrapped).substr(i, n)) %
                             buckets));
  ids.push_back(uint32_t(fnv1a32(wrapped) % buckets));
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Ids of the configured, in-vocabulary properties of one token. Missing
// (out-of-vocabulary) properties are omitted; the result may be empty.
inline std::vector<uint32_t> extract_properties(const Token& t,
                                                const PropertyConfig& c,
                                                const Vocabulary& v) {
  if (c.mode == PropertyConfig::Mode::Ngrams)
    return ngram_ids(t.surface, c.minn, c.maxn, c.buckets);
  std::vector<uint32_t> ids;
  if (c.props & kSurfaceProp)
    if (auto id = v.property_id(surface_key(t.surface))) ids.push_back(*id);
  if (c.props & kLemmaProp)
    if (auto id = v.property_id(lemma_key(t.lemma))) ids.push_back(*id);
  if (c.props & kTagProp)
    if (auto id = v.property_id(tag_key(t.tag.text()))) ids.push_back(*id);
  return ids;
}

// Distribution over context-word ids with P(w) proportional to count^alpha.
class SamplingDist {
 public:
  SamplingDist() = default;

  explicit SamplingDist(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("empty distribution");
    double sum = 0;
    for (double w : weights) sum += w;
    if (!(sum > 0)) throw std::invalid_argument("non-positive weight sum");
    pdf_ = std::move(weights);
    cdf_.resize(pdf_.size());
    double acc = 0;
    for (size_t i = 0; i < pdf_.size(); ++i) {
      pdf_[i] /= sum;
      acc += pdf_[i];
      cdf_[i] = acc;
    }
  }

  size_t size() const { return pdf_.size(); }
  double probability(uint32_t id) const { return pdf_.at(id); }

  template <typename Gen>
  uint32_t sample(Gen& g) const {
    double u = canonical(g) * cdf_.back();
    size_t i = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
    if (i >= cdf_.size()) i = cdf_.size() - 1;
    return uint32_t(i);
  }

 private:
  std::vector<double> pdf_;
  std::vector<double> cdf_;
};

inline SamplingDist negative_dist(const Vocabulary& vocab, double alpha) {
  if (vocab.size() == 0) throw std::invalid_argument("empty vocabulary");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");
  std::vector<double> w(vocab.size());
  for (uint32_t i = 0; i < vocab.size(); ++i)
    w[i] = std::pow(double(vocab.word(i).count), alpha);
  return SamplingDist(std::move(w));
}

// Frequent-word subsampling: keep probability min(1, sqrt(t/f) + t/f) for a
// word with corpus frequency f = count/total.
inline double keep_probability(uint64_t count, uint64_t total, double t) {
  if (!(t > 0)) throw std::invalid_argument("subsample threshold t must be > 0");
  if (count == 0 || count > total)
    throw std::invalid_argument("need 0 < count <= total");
  double f = double(count) / double(total);
  return std::min(1.0, std::sqrt(t / f) + t / f);
}

}  // namespace propvec
