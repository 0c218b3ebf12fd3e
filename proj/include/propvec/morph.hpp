#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "propvec/util.hpp"

namespace propvec {

// Ordered grammatical slot values, e.g. "VB.F.S.3.PAST" -> {VB,F,S,3,PAST}.
struct MorphTag {
  std::vector<std::string> slots;

  static MorphTag parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty morphological tag");
    MorphTag tag;
    for (auto part : split(text, '.')) {
      if (part.empty())
        throw std::invalid_argument("empty slot value in tag '" +
                                    std::string(text) + "'");
      tag.slots.emplace_back(part);
    }
    return tag;
  }

  std::string text() const {
    std::string out;
    for (size_t i = 0; i < slots.size(); ++i) {
      if (i) out += '.';
      out += slots[i];
    }
    return out;
  }

  size_t arity() const { return slots.size(); }

  auto operator<=>(const MorphTag&) const = default;
};

// Positional Hamming distance between tags; a slot present in only one of
// the two tags counts as a mismatch.
inline uint32_t hamming(const MorphTag& a, const MorphTag& b) {
  size_t shared = std::min(a.slots.size(), b.slots.size());
  auto d = uint32_t(std::max(a.slots.size(), b.slots.size()) - shared);
  for (size_t i = 0; i < shared; ++i)
    if (a.slots[i] != b.slots[i]) ++d;
  return d;
}

// One corpus word: the surface form as written plus its disambiguated
// lemma and morphological tag.
struct Token {
  std::string surface;
  std::string lemma;
  MorphTag tag;

  std::string text() const { return surface + "|" + lemma + "|" + tag.text(); }

  auto operator<=>(const Token&) const = default;
};

using Sentence = std::vector<Token>;

}  // namespace propvec
