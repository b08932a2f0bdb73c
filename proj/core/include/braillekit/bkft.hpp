#pragma once

// Vocabulary extension with Braille tokens and knowledge-based initialisation
// of their embeddings: a Chinese fragment starts at the mean embedding of the
// homophone character tokens of its syllable, an English fragment starts as a
// copy of its word's embedding.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "braillekit/embedding.hpp"
#include "braillekit/knowledge_base.hpp"

namespace braillekit {

// `<|FRAGMENT|>`
std::string braille_token_name(std::string_view fragment);
// Inverse of braille_token_name; nullopt for ordinary tokens.
std::optional<std::string> fragment_of_token(std::string_view token_name);

// Character -> Pinyin readings (`character \t syllable`, one reading per row).
class CharPinyinTable {
 public:
  static CharPinyinTable load(const std::filesystem::path& path);
  static CharPinyinTable parse(std::istream& in);

  // Throws Error("ParseError") for a non-syllable or a multi-character key.
  void add(std::string character, std::string syllable);
  // Readings in file order; empty when unknown.
  const std::vector<std::string>& readings(std::string_view character) const;
  std::size_t size() const noexcept { return readings_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> readings_;
};

// Syllable -> rows of single-character vocabulary tokens carrying it.
class SyllableTokenMap {
 public:
  static SyllableTokenMap build(const VocabIndex& vocab, const CharPinyinTable& readings);

  void add(std::string_view syllable, std::size_t row);
  // Exact-tone rows if any, else rows of any tone; ascending row ids.
  std::vector<std::size_t> tokens_for(std::string_view syllable) const;
  std::size_t syllable_count() const noexcept { return exact_.size(); }

 private:
  std::unordered_map<std::string, std::vector<std::size_t>> exact_;
  std::unordered_map<std::string, std::vector<std::size_t>> toneless_;
};

// Appends `<|f|>` rows, zero-filled, for each fragment. Existing rows are left
// untouched. Throws Error("DuplicateToken").
VocabEmbedding extend_vocab(VocabEmbedding model, std::span<const std::string> fragments);

// Writes the mean of the syllable's token rows (summed in ascending row order)
// into the fragment's row and returns it. Without an explicit syllable the
// fragment must have exactly one counterpart in `kc`. Throws
// Error("UnknownFragment"), Error("EmptySyllableSet") or
// Error("AmbiguousSyllable").
std::vector<double> init_chinese(VocabEmbedding& model, const SyllableTokenMap& syllables,
                                 const KnowledgeBase& kc, std::string_view fragment,
                                 std::optional<std::string_view> syllable = std::nullopt);

// Copies the word's row into the fragment's row. A word missing from the
// vocabulary is split greedily into the longest known pieces and their mean is
// used instead. Throws Error("UnknownFragment") or Error("WordNotInVocab").
std::vector<double> init_english(VocabEmbedding& model, const KnowledgeBase& ke, std::string_view fragment);

struct SkippedToken {
  std::string token;
  std::string reason;  // error kind
};

struct InitReport {
  std::size_t chinese_inited = 0;
  std::size_t english_inited = 0;
  std::vector<SkippedToken> skipped;
};

// Initialises every `<|...|>` row: Chinese when the fragment is in `kc` (using
// its most frequent syllable), English when it is in `ke`. Failures are listed
// in the report, never thrown. Re-running rewrites identical values.
InitReport init_all(VocabEmbedding& model, const KnowledgeBase& kc, const KnowledgeBase& ke,
                    const SyllableTokenMap& syllables);

}  // namespace braillekit
