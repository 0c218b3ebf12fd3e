#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "propvec/util.hpp"

namespace propvec {

// Dense word -> vector table, as written by export_word_vectors. Immutable
// after load; safe for concurrent reads.
struct WordVectors {
  uint32_t dim = 0;
  std::vector<std::string> words;  // file order
  std::vector<float> data;         // row-major, words.size() x dim
  std::unordered_map<std::string, uint32_t> index;

  size_t size() const { return words.size(); }

  std::span<const float> row(uint32_t i) const {
    return {data.data() + size_t(i) * dim, dim};
  }

  std::optional<uint32_t> find(std::string_view word) const {
    auto it = index.find(std::string(word));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  void add(std::string word, std::span<const float> v) {
    if (v.size() != dim) throw std::invalid_argument("dimension mismatch");
    if (!index.emplace(word, uint32_t(words.size())).second)
      throw std::invalid_argument("duplicate word '" + word + "'");
    words.push_back(std::move(word));
    data.insert(data.end(), v.begin(), v.end());
  }
};

// Text format: header "<count> <dim>", then one "<word> <v1> ... <vdim>"
// line per word.
inline WordVectors load_word_vectors(std::istream& in) {
  WordVectors wv;
  size_t count = 0;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty vector file");
  {
    char* end = nullptr;
    count = std::strtoull(line.c_str(), &end, 10);
    wv.dim = uint32_t(std::strtoul(end, &end, 10));
    if (wv.dim == 0) throw std::runtime_error("bad vector file header");
  }
  std::vector<float> v(wv.dim);
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0)
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": malformed vector line");
    const char* p = line.c_str() + sp;
    for (uint32_t j = 0; j < wv.dim; ++j) {
      char* end = nullptr;
      v[j] = std::strtof(p, &end);
      if (end == p)
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": expected " + std::to_string(wv.dim) +
                                 " values");
      p = end;
    }
    wv.add(line.substr(0, sp), v);
  }
  if (wv.size() != count)
    throw std::runtime_error("vector file header declares " +
                             std::to_string(count) + " words, found " +
                             std::to_string(wv.size()));
  return wv;
}

inline WordVectors load_word_vectors_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open vector file: " + path);
  return load_word_vectors(f);
}

// Cosine similarity; accumulates in double and clamps to [-1, 1]. Zero
// vectors have no direction, so they are rejected.
inline double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  double d = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    d += double(a[i]) * double(b[i]);
    na += double(a[i]) * double(a[i]);
    nb += double(b[i]) * double(b[i]);
  }
  if (na == 0 || nb == 0)
    throw std::domain_error("undefined cosine for zero vector");
  return std::clamp(d / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

struct Neighbor {
  std::string word;
  double cosine = 0;
};

struct NeighborList {
  std::string query;
  std::vector<Neighbor> neighbors;  // descending cosine, ties lexicographic
};

namespace detail {
// Total order on candidates: higher cosine first, then lexicographic word.
inline bool neighbor_better(double ca, const std::string& wa, double cb,
                            const std::string& wb) {
  if (ca != cb) return ca > cb;
  return wa < wb;
}
}  // namespace detail

// Exhaustive top-k scan with a bounded heap. The query itself and words
// with zero vectors are excluded. Unknown queries fail with the closest
// spellings as a hint.
inline NeighborList top_k(const WordVectors& wv, const std::string& word,
                          size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  auto qid = wv.find(word);
  if (!qid) {
    std::vector<std::pair<size_t, std::string>> near;
    for (const auto& w : wv.words) near.emplace_back(levenshtein(word, w), w);
    std::sort(near.begin(), near.end());
    std::string hint;
    for (size_t i = 0; i < near.size() && i < 3; ++i)
      hint += (i ? ", " : "") + near[i].second;
    throw std::runtime_error("unknown word '" + word + "'" +
                             (hint.empty() ? "" : " (closest: " + hint + ")"));
  }
  auto q = wv.row(*qid);
  if (std::all_of(q.begin(), q.end(), [](float x) { return x == 0.0f; }))
    throw std::domain_error("undefined cosine for zero vector (query '" +
                            word + "')");

  // Min-heap of the best k so far: top() is the worst kept candidate.
  using Entry = std::pair<double, uint32_t>;
  auto worse = [&](const Entry& a, const Entry& b) {
    return detail::neighbor_better(a.first, wv.words[a.second], b.first,
                                   wv.words[b.second]);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (uint32_t i = 0; i < wv.size(); ++i) {
    if (i == *qid) continue;
    double c;
    try {
      c = cosine(q, wv.row(i));
    } catch (const std::domain_error&) {
      continue;  // zero candidate vector: unrankable, skip
    }
    if (heap.size() < k) {
      heap.emplace(c, i);
    } else if (detail::neighbor_better(c, wv.words[i], heap.top().first,
                                       wv.words[heap.top().second])) {
      heap.pop();
      heap.emplace(c, i);
    }
  }

  NeighborList out;
  out.query = word;
  out.neighbors.resize(heap.size());
  for (size_t i = heap.size(); i-- > 0;) {
    out.neighbors[i] = {wv.words[heap.top().second], heap.top().first};
    heap.pop();
  }
  return out;
}

}  // namespace propvec
