#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "propvec/corpus.hpp"
#include "propvec/model.hpp"
#include "propvec/vectors.hpp"

namespace propvec {

// Eval-side words carry full annotations so every property configuration
// can compose them, including out-of-vocabulary surfaces.
using AnnotatedWord = Token;

// One confidence-weighted ranking decision: the target should be more
// similar to cand_high than to cand_low.
struct Triple {
  AnnotatedWord target;
  AnnotatedWord cand_high;
  AnnotatedWord cand_low;
  double weight = 1.0;
};

// TSV with 4 columns: target, cand_high, cand_low (each `surface|lemma|tag`)
// and a confidence weight in (0, 1].
inline std::vector<Triple> parse_triples(std::istream& in) {
  std::vector<Triple> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 4)
      throw ParseError(line_no, "expected 4 tab-separated columns, got " +
                                    std::to_string(cols.size()));
    Triple t;
    t.target = parse_token(cols[0], line_no, 1);
    t.cand_high = parse_token(cols[1], line_no, 2);
    t.cand_low = parse_token(cols[2], line_no, 3);
    char* end = nullptr;
    t.weight = std::strtod(std::string(cols[3]).c_str(), &end);
    if (!(t.weight > 0) || t.weight > 1)
      throw ParseError(line_no, "weight must be in (0,1], got '" +
                                    std::string(cols[3]) + "'");
    if (t.target.surface == t.cand_high.surface ||
        t.target.surface == t.cand_low.surface ||
        t.cand_high.surface == t.cand_low.surface)
      throw ParseError(line_no, "triple surfaces must be distinct");
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<Triple> parse_triples_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open triples file: " + path);
  return parse_triples(f);
}

// Compose an annotated word under the model's configuration from whichever
// of its properties are in-vocabulary. NONE when nothing is known.
inline std::optional<std::vector<float>> represent(const AnnotatedWord& w,
                                                   const Model& m) {
  auto ids = extract_properties(w, m.config, m.vocab);
  if (ids.empty()) return std::nullopt;
  return m.compose(ids);
}

struct SemanticScore {
  double score = 0;     // in [0, 1]
  uint64_t covered = 0;
  uint64_t skipped = 0;
};

// Confidence-weighted ranking accuracy over the triples the representer
// covers: 1 per correctly ranked triple, 0.5 for an exact cosine tie, 0
// otherwise, weighted and normalized by total covered weight. Triples with
// any unrepresentable (or zero-vector) word are skipped, not penalized.
template <typename RepFn>
SemanticScore ag_score_with(std::span<const Triple> triples, RepFn&& rep) {
  if (triples.empty()) throw std::invalid_argument("no triples");
  auto usable = [](const std::optional<std::vector<float>>& v) {
    if (!v) return false;
    for (float x : *v)
      if (x != 0.0f) return true;
    return false;
  };
  SemanticScore out;
  double wsum = 0, wcorrect = 0;
  for (const auto& t : triples) {
    auto vt = rep(t.target);
    auto vh = rep(t.cand_high);
    auto vl = rep(t.cand_low);
    if (!usable(vt) || !usable(vh) || !usable(vl)) {
      ++out.skipped;
      continue;
    }
    double ch = cosine(*vt, *vh);
    double cl = cosine(*vt, *vl);
    double correct = ch > cl ? 1.0 : (ch == cl ? 0.5 : 0.0);
    wsum += t.weight;
    wcorrect += t.weight * correct;
    ++out.covered;
  }
  if (out.covered == 0)
    throw std::runtime_error("no coverage: no triple is fully representable");
  out.score = wcorrect / wsum;
  return out;
}

inline SemanticScore ag_score(const Model& m, std::span<const Triple> triples) {
  return ag_score_with(triples,
                       [&](const AnnotatedWord& w) { return represent(w, m); });
}

}  // namespace propvec
