#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace propvec {

// Property namespace bits for the {W, L, M} subsets.
enum : uint8_t {
  kSurfaceProp = 1,
  kLemmaProp = 2,
  kTagProp = 4,
};

enum class Composition : uint8_t { Sum = 0, Mean = 1 };

// Which linguistic properties compose a word vector (Properties mode), or
// the character n-gram settings (Ngrams mode).
struct PropertyConfig {
  enum class Mode : uint8_t { Properties = 0, Ngrams = 1 };

  Mode mode = Mode::Properties;
  uint8_t props = kSurfaceProp | kLemmaProp | kTagProp;
  uint32_t minn = 3;
  uint32_t maxn = 6;
  uint64_t buckets = 2000000;
  Composition composition = Composition::Sum;

  // Accepts a subset of the letters W/L/M in any order ("WL", "M", "WLM"),
  // or the literal "ngrams".
  static PropertyConfig from_string(const std::string& s) {
    PropertyConfig c;
    if (s == "ngrams") {
      c.mode = Mode::Ngrams;
      c.props = 0;
      return c;
    }
    c.props = 0;
    for (char ch : s) {
      switch (ch) {
        case 'W': c.props |= kSurfaceProp; break;
        case 'L': c.props |= kLemmaProp; break;
        case 'M': c.props |= kTagProp; break;
        default:
          throw std::invalid_argument(
              "invalid props '" + s +
              "': expected a subset of WLM (e.g. W, L, WL, WM, WLM) or 'ngrams'");
      }
    }
    if (!c.props)
      throw std::invalid_argument(
          "invalid props '': expected a subset of WLM or 'ngrams'");
    return c;
  }

  void validate() const {
    if (mode == Mode::Properties) {
      if (!props || (props & ~uint8_t(kSurfaceProp | kLemmaProp | kTagProp)))
        throw std::invalid_argument("property subset must be non-empty within {W,L,M}");
    } else {
      if (minn < 1 || minn > maxn)
        throw std::invalid_argument("need 1 <= minn <= maxn");
      if (buckets < 1 || buckets > 0xffffffffull)
        throw std::invalid_argument("buckets must be in [1, 2^32)");
    }
  }

  std::string label() const {
    if (mode == Mode::Ngrams) return "ngrams";
    std::string out;
    if (props & kSurfaceProp) out += 'W';
    if (props & kLemmaProp) out += 'L';
    if (props & kTagProp) out += 'M';
    return out;
  }

  bool operator==(const PropertyConfig&) const = default;
};

}  // namespace propvec
