#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "braillekit/braille.hpp"
#include "braillekit/dataset.hpp"
#include "braillekit/knowledge_base.hpp"
#include "braillekit/rng.hpp"
#include "braillekit/text_util.hpp"

namespace testing {

inline std::filesystem::path data(const std::string& relative) {
  return std::filesystem::path(BRAILLEKIT_TEST_DATA_DIR) / relative;
}

inline braillekit::KnowledgeBase kb_from(const std::string& tsv, braillekit::Language language) {
  std::istringstream in(tsv);
  return braillekit::KnowledgeBase::parse(in, language);
}

// Random string of n cell characters (no blank cell, no separator).
inline std::string random_cells(braillekit::Rng& rng, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += braillekit::kBrailleAscii[1 + rng.index(63)];
  return out;
}

// A valid Chinese example with n aligned units: 1-2 Han characters against a
// 1-3 cell Braille word each.
inline braillekit::ParallelExample aligned_example(std::size_t n, std::uint64_t seed) {
  braillekit::Rng rng(seed);
  braillekit::ParallelExample ex;
  ex.id = "ex" + std::to_string(seed);
  ex.language = braillekit::Language::Chinese;
  std::size_t cp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t chars = 1 + rng.index(2);
    for (std::size_t c = 0; c < chars; ++c) braillekit::append_utf8(ex.text, char32_t(0x4E00 + rng.index(2000)));
    if (i > 0) ex.braille += ' ';
    const std::size_t b0 = ex.braille.size();
    ex.braille += random_cells(rng, 1 + rng.index(3));
    ex.alignment.push_back({cp, cp + chars, b0, ex.braille.size()});
    cp += chars;
  }
  return ex;
}

}  // namespace testing
