#include "braillekit/knowledge_base.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <utility>

#include "braillekit/rng.hpp"
#include "braillekit/text_util.hpp"

namespace braillekit {
namespace {

std::string describe(const std::vector<RowError>& rows) {
  std::string message = std::to_string(rows.size()) + " invalid row(s)";
  if (!rows.empty()) {
    message += "; first at line " + std::to_string(rows.front().line) + ": " + rows.front().kind + " (" +
               rows.front().reason + ")";
  }
  return message;
}

std::uint64_t parse_frequency(std::string_view field) {
  std::uint64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error("ParseError", "frequency '" + std::string(field) + "' is not a non-negative integer");
  }
  return value;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("FileNotFound", "cannot open " + path.string());
  return in;
}

// Runs `handle` on every row and collects failures as RowErrors.
template <typename Handler>
void for_each_row(std::istream& in, Handler&& handle) {
  std::vector<RowError> failures;
  for (const TsvRow& row : read_tsv(in)) {
    try {
      handle(row);
    } catch (const Error& e) {
      failures.push_back({row.line, e.kind() == "DuplicateEntry" ? e.kind() : "ParseError", e.what()});
    }
  }
  if (!failures.empty()) throw KbLoadError(std::move(failures));
}

}  // namespace

KbLoadError::KbLoadError(std::vector<RowError> rows)
    : Error(rows.empty() ? "ParseError" : rows.front().kind, describe(rows)), rows_(std::move(rows)) {}

std::string_view to_string(Language language) noexcept {
  return language == Language::Chinese ? "zh" : "en";
}

Language parse_language(std::string_view name) {
  const std::string lower = to_lower_ascii(name);
  if (lower == "zh" || lower == "chinese") return Language::Chinese;
  if (lower == "en" || lower == "english") return Language::English;
  throw Error("InvalidLanguage", "unknown language '" + std::string(name) + "'");
}

bool is_pinyin_syllable(std::string_view syllable) {
  std::size_t i = 0;
  std::size_t letters = 0;
  while (i < syllable.size()) {
    const char c = syllable[i];
    if (c >= 'a' && c <= 'z') {
      ++i;
      ++letters;
    } else if (syllable.substr(i, 2) == "\xC3\xBC") {  // ü
      i += 2;
      ++letters;
    } else {
      break;
    }
  }
  if (letters == 0) return false;
  if (i == syllable.size()) return true;
  return i + 1 == syllable.size() && syllable[i] >= '1' && syllable[i] <= '5';
}

std::string_view strip_tone(std::string_view syllable) noexcept {
  if (!syllable.empty() && syllable.back() >= '1' && syllable.back() <= '5') syllable.remove_suffix(1);
  return syllable;
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path, Language language) {
  auto in = open(path);
  return parse(in, language);
}

KnowledgeBase KnowledgeBase::parse(std::istream& in, Language language) {
  KnowledgeBase kb(language);
  for_each_row(in, [&](const TsvRow& row) {
    if (row.fields.size() < 2 || row.fields.size() > 3) {
      throw Error("ParseError", "expected 2 or 3 tab-separated fields");
    }
    PriorEntry entry{BrailleFragment::parse(row.fields[0]), row.fields[1], language, 0};
    if (row.fields.size() == 3) entry.frequency = parse_frequency(row.fields[2]);
    kb.add_prior(std::move(entry));
  });
  return kb;
}

void KnowledgeBase::load_attributes(const std::filesystem::path& path) {
  auto in = open(path);
  parse_attributes(in);
}

void KnowledgeBase::parse_attributes(std::istream& in) {
  for_each_row(in, [&](const TsvRow& row) {
    if (row.fields.size() != 3) throw Error("ParseError", "expected fragment, attribute and text");
    add_attribute({BrailleFragment::parse(row.fields[0]), row.fields[1], row.fields[2]});
  });
}

void KnowledgeBase::load_words(const std::filesystem::path& path) {
  auto in = open(path);
  parse_words(in);
}

void KnowledgeBase::parse_words(std::istream& in) {
  for_each_row(in, [&](const TsvRow& row) {
    if (row.fields.empty() || row.fields.size() > 2) {
      throw Error("ParseError", "expected fragments and an optional frequency");
    }
    WordEntry word;
    for (std::string_view part : split_whitespace(row.fields[0])) {
      word.fragments.push_back(BrailleFragment::parse(part));
      word.cells += part;
    }
    if (row.fields.size() == 2) word.frequency = parse_frequency(row.fields[1]);
    add_word(std::move(word));
  });
}

void KnowledgeBase::add_prior(PriorEntry entry) {
  if (entry.counterpart.empty()) throw Error("ParseError", "empty counterpart");
  if (entry.language != language_) throw Error("ParseError", "entry language differs from knowledge base");
  if (language_ == Language::Chinese && !is_pinyin_syllable(entry.counterpart)) {
    throw Error("ParseError", "'" + entry.counterpart + "' is not a Pinyin syllable");
  }
  auto& same_fragment = by_fragment_[entry.fragment.str()];
  for (std::size_t i : same_fragment) {
    if (entries_[i].counterpart == entry.counterpart) {
      throw Error("DuplicateEntry", "duplicate pair " + entry.fragment.str() + " -> " + entry.counterpart);
    }
  }
  const std::size_t index = entries_.size();
  same_fragment.push_back(index);
  by_counterpart_[entry.counterpart].push_back(index);
  if (language_ == Language::Chinese) by_toneless_[std::string(strip_tone(entry.counterpart))].push_back(index);
  max_fragment_length_ = std::max(max_fragment_length_, entry.fragment.size());
  entries_.push_back(std::move(entry));
}

void KnowledgeBase::add_attribute(AttributeEntry entry) {
  if (entry.attribute.empty()) throw Error("ParseError", "empty attribute label");
  if (entry.text.empty()) throw Error("ParseError", "empty text counterpart");
  auto [it, fresh] = by_attribute_.try_emplace(entry.attribute);
  for (std::size_t i : it->second) {
    if (attributes_[i].fragment == entry.fragment) {
      throw Error("DuplicateEntry",
                  "duplicate attribute pair " + entry.fragment.str() + " / " + entry.attribute);
    }
  }
  if (fresh) attribute_order_.push_back(entry.attribute);
  it->second.push_back(attributes_.size());
  attributes_.push_back(std::move(entry));
}

void KnowledgeBase::add_word(WordEntry entry) {
  if (entry.fragments.empty()) throw Error("ParseError", "empty word");
  if (word_index_.contains(entry.cells)) throw Error("DuplicateEntry", "duplicate word " + entry.cells);
  word_index_.emplace(entry.cells, words_.size());
  max_word_length_ = std::max(max_word_length_, entry.cells.size());
  words_.push_back(std::move(entry));
}

std::vector<std::string> KnowledgeBase::ordered(const std::vector<std::size_t>& indices,
                                                bool by_fragment) const {
  std::vector<const PriorEntry*> sorted;
  sorted.reserve(indices.size());
  for (std::size_t i : indices) sorted.push_back(&entries_[i]);
  const auto key = [by_fragment](const PriorEntry* e) -> const std::string& {
    return by_fragment ? e->counterpart : e->fragment.str();
  };
  std::sort(sorted.begin(), sorted.end(), [&](const PriorEntry* a, const PriorEntry* b) {
    if (a->frequency != b->frequency) return a->frequency > b->frequency;
    return key(a) < key(b);
  });
  std::vector<std::string> out;
  for (const PriorEntry* e : sorted) {
    if (std::find(out.begin(), out.end(), key(e)) == out.end()) out.push_back(key(e));
  }
  return out;
}

std::vector<std::string> KnowledgeBase::lookup(std::string_view fragment) const {
  const auto it = by_fragment_.find(std::string(fragment));
  if (it == by_fragment_.end()) return {};
  return ordered(it->second, true);
}

std::vector<std::string> KnowledgeBase::inverse_lookup(std::string_view counterpart) const {
  if (const auto it = by_counterpart_.find(std::string(counterpart)); it != by_counterpart_.end()) {
    return ordered(it->second, false);
  }
  if (language_ == Language::Chinese) {
    if (const auto it = by_toneless_.find(std::string(strip_tone(counterpart))); it != by_toneless_.end()) {
      return ordered(it->second, false);
    }
  }
  return {};
}

bool KnowledgeBase::contains(std::string_view fragment) const {
  return by_fragment_.contains(std::string(fragment));
}

const WordEntry* KnowledgeBase::find_word(std::string_view cells) const {
  const auto it = word_index_.find(std::string(cells));
  return it == word_index_.end() ? nullptr : &words_[it->second];
}

std::vector<std::string> KnowledgeBase::attribute_labels() const { return attribute_order_; }

std::vector<const AttributeEntry*> KnowledgeBase::attribute_group(std::string_view attribute) const {
  std::vector<const AttributeEntry*> group;
  if (const auto it = by_attribute_.find(std::string(attribute)); it != by_attribute_.end()) {
    for (std::size_t i : it->second) group.push_back(&attributes_[i]);
  }
  return group;
}

const AttributeEntry& KnowledgeBase::sample_compatible(std::string_view attribute, std::string_view exclude,
                                                       std::uint64_t seed) const {
  std::vector<const AttributeEntry*> candidates;
  for (const AttributeEntry* entry : attribute_group(attribute)) {
    if (entry->fragment.str() != exclude) candidates.push_back(entry);
  }
  if (candidates.empty()) {
    throw Error("EmptyAttributeGroup", "no '" + std::string(attribute) + "' fragment other than '" +
                                           std::string(exclude) + "'");
  }
  Rng rng(seed);
  return *candidates[rng.index(candidates.size())];
}

std::size_t cell_edit_distance(std::string_view a, std::string_view b) {
  const auto x = dot_masks(a);
  const auto y = dot_masks(b);
  std::vector<std::size_t> previous(y.size() + 1);
  std::vector<std::size_t> current(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) previous[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    current[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t substitute = previous[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      current[j] = std::min({previous[j] + 1, current[j - 1] + 1, substitute});
    }
    std::swap(previous, current);
  }
  return previous[y.size()];
}

double similarity(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(cell_edit_distance(a, b)) / static_cast<double>(longest);
}

}  // namespace braillekit
