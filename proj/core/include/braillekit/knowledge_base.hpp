#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "braillekit/braille.hpp"
#include "braillekit/error.hpp"

namespace braillekit {

enum class Language { Chinese, English };

std::string_view to_string(Language language) noexcept;
// Accepts "zh"/"chinese" and "en"/"english". Throws Error("InvalidLanguage").
Language parse_language(std::string_view name);

// Letters (a-z, ü, v) followed by an optional tone digit 1-5.
bool is_pinyin_syllable(std::string_view syllable);
// "han4" -> "han"
std::string_view strip_tone(std::string_view syllable) noexcept;

// One (fragment, counterpart) pair of a prior knowledge base: a Pinyin
// syllable for Chinese, a word for English.
struct PriorEntry {
  BrailleFragment fragment;
  std::string counterpart;
  Language language = Language::Chinese;
  std::uint64_t frequency = 0;
};

struct AttributeEntry {
  BrailleFragment fragment;
  std::string attribute;
  std::string text;
};

// A multi-fragment Braille word used by word segmentation.
struct WordEntry {
  std::vector<BrailleFragment> fragments;
  std::string cells;  // fragments concatenated
  std::uint64_t frequency = 0;
};

struct RowError {
  std::size_t line = 0;
  std::string kind;  // "ParseError" or "DuplicateEntry"
  std::string reason;
};

// Raised by the loaders with every rejected row.
class KbLoadError : public Error {
 public:
  explicit KbLoadError(std::vector<RowError> rows);
  const std::vector<RowError>& rows() const noexcept { return rows_; }

 private:
  std::vector<RowError> rows_;
};

class KnowledgeBase {
 public:
  explicit KnowledgeBase(Language language = Language::Chinese) : language_(language) {}

  // Prior table: `fragment \t counterpart [\t frequency]`.
  static KnowledgeBase load(const std::filesystem::path& path, Language language);
  static KnowledgeBase parse(std::istream& in, Language language);

  // Attribute table: `fragment \t attribute \t text`.
  void load_attributes(const std::filesystem::path& path);
  void parse_attributes(std::istream& in);
  // Word inventory: `space-joined fragments [\t frequency]`.
  void load_words(const std::filesystem::path& path);
  void parse_words(std::istream& in);

  // Throw Error("DuplicateEntry") or Error("ParseError").
  void add_prior(PriorEntry entry);
  void add_attribute(AttributeEntry entry);
  void add_word(WordEntry entry);

  Language language() const noexcept { return language_; }

  // Counterparts ordered by descending frequency, then lexicographically.
  std::vector<std::string> lookup(std::string_view fragment) const;
  // Fragments for a counterpart, same ordering. Chinese falls back to a
  // tone-insensitive match when the exact syllable is absent.
  std::vector<std::string> inverse_lookup(std::string_view counterpart) const;
  bool contains(std::string_view fragment) const;

  const std::vector<PriorEntry>& entries() const noexcept { return entries_; }
  const std::vector<AttributeEntry>& attribute_entries() const noexcept { return attributes_; }
  const std::vector<WordEntry>& words() const noexcept { return words_; }
  const WordEntry* find_word(std::string_view cells) const;

  // Distinct attribute labels in first-seen order.
  std::vector<std::string> attribute_labels() const;
  std::vector<const AttributeEntry*> attribute_group(std::string_view attribute) const;

  // Uniform draw from the attribute group minus `exclude`. Throws
  // Error("EmptyAttributeGroup").
  const AttributeEntry& sample_compatible(std::string_view attribute, std::string_view exclude,
                                          std::uint64_t seed) const;

  std::size_t max_fragment_length() const noexcept { return max_fragment_length_; }
  std::size_t max_word_length() const noexcept { return max_word_length_; }

 private:
  std::vector<std::string> ordered(const std::vector<std::size_t>& indices, bool by_fragment) const;

  Language language_;
  std::vector<PriorEntry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_fragment_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_counterpart_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_toneless_;
  std::vector<AttributeEntry> attributes_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_attribute_;
  std::vector<std::string> attribute_order_;
  std::vector<WordEntry> words_;
  std::unordered_map<std::string, std::size_t> word_index_;
  std::size_t max_fragment_length_ = 0;
  std::size_t max_word_length_ = 0;
};

// Levenshtein distance between the dot-mask sequences of two cell strings.
std::size_t cell_edit_distance(std::string_view a, std::string_view b);
// 1 - distance / max(len); 1 when both are empty.
double similarity(std::string_view a, std::string_view b);
inline double similarity(const BrailleFragment& a, const BrailleFragment& b) {
  return similarity(a.str(), b.str());
}

}  // namespace braillekit
