#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "braillekit/braille.hpp"
#include "braillekit/knowledge_base.hpp"

namespace braillekit {

inline constexpr std::string_view kOovCounterpart = "<oov>";

struct Token {
  std::string fragment;
  // Top counterpart from the knowledge base; empty for out-of-vocabulary cells.
  std::optional<std::string> counterpart;
  std::size_t start = 0;  // byte span in the source sequence
  std::size_t end = 0;

  bool oov() const noexcept { return !counterpart.has_value(); }
  friend bool operator==(const Token&, const Token&) = default;
};

struct TokenizedSequence {
  std::vector<Token> tokens;
  // Indices of tokens that start a new word (every word but the first).
  std::vector<std::size_t> word_boundaries;

  // Concatenates the fragments and reinserts the separators.
  std::string reconstruct() const;
  // `<|A|><|B|>...`
  std::string render_tokens() const;
  // One JSON object per token: {"fragment","counterpart","start","end"}.
  std::string to_jsonl() const;
};

// Splits each word into knowledge-base fragments, maximising the cells covered
// by known fragments, then preferring fewer tokens, then the leftmost-longest
// split. Uncovered cells become single-cell OOV tokens.
TokenizedSequence segment(const BrailleSequence& sequence, const KnowledgeBase& kb);

// Optimal split of a single word; exposed for testing.
std::vector<std::string> segment_word(std::string_view word, const KnowledgeBase& kb);

// Top counterpart per token, kOovCounterpart for OOV tokens.
std::vector<std::string> map_counterparts(const TokenizedSequence& tokens, const KnowledgeBase& kb);

// Inserts word separators using the knowledge base's word inventory. Within
// each existing chunk the split maximises the cells covered by inventory
// words, then the summed log(1 + frequency), then prefers fewer words.
// Cells not covered by any word stay together as one unit. Existing spaces are
// kept. Throws PositionedError("InvalidChar").
BrailleSequence word_segment(std::string_view text, const KnowledgeBase& kb);

}  // namespace braillekit
