#include "braillekit/bkft.hpp"

#include <algorithm>
#include <fstream>

#include "braillekit/error.hpp"
#include "braillekit/text_util.hpp"

namespace braillekit {
namespace {

std::size_t braille_row(const VocabEmbedding& model, std::string_view fragment) {
  const auto row = model.vocab.find(braille_token_name(fragment));
  if (!row) {
    throw Error("UnknownFragment", "no vocabulary row for " + braille_token_name(fragment));
  }
  return *row;
}

// Mean of the given rows, accumulated in ascending row order.
std::vector<double> mean_of_rows(const EmbeddingTable& table, std::vector<std::size_t> rows) {
  std::sort(rows.begin(), rows.end());
  std::vector<double> mean(table.dim(), 0.0);
  for (std::size_t r : rows) {
    const auto source = table.row(r);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += source[k];
  }
  const double count = static_cast<double>(rows.size());
  for (double& v : mean) v /= count;
  return mean;
}

void publish(EmbeddingTable& table, std::size_t row, const std::vector<double>& staged) {
  std::copy(staged.begin(), staged.end(), table.row(row).begin());
}

bool single_code_point(std::string_view text) {
  try {
    return decode_utf8(text).size() == 1;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::string braille_token_name(std::string_view fragment) { return "<|" + std::string(fragment) + "|>"; }

std::optional<std::string> fragment_of_token(std::string_view token_name) {
  if (token_name.size() <= 4 || !token_name.starts_with("<|") || !token_name.ends_with("|>")) {
    return std::nullopt;
  }
  return std::string(token_name.substr(2, token_name.size() - 4));
}

CharPinyinTable CharPinyinTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("FileNotFound", "cannot open " + path.string());
  return parse(in);
}

CharPinyinTable CharPinyinTable::parse(std::istream& in) {
  CharPinyinTable table;
  for (const TsvRow& row : read_tsv(in)) {
    if (row.fields.size() != 2) {
      throw Error("ParseError", "line " + std::to_string(row.line) + ": expected character and syllable");
    }
    try {
      table.add(row.fields[0], row.fields[1]);
    } catch (const Error& e) {
      throw Error("ParseError", "line " + std::to_string(row.line) + ": " + e.what());
    }
  }
  return table;
}

void CharPinyinTable::add(std::string character, std::string syllable) {
  if (!single_code_point(character)) throw Error("ParseError", "'" + character + "' is not one character");
  if (!is_pinyin_syllable(syllable)) throw Error("ParseError", "'" + syllable + "' is not a Pinyin syllable");
  auto& list = readings_[std::move(character)];
  if (std::find(list.begin(), list.end(), syllable) == list.end()) list.push_back(std::move(syllable));
}

const std::vector<std::string>& CharPinyinTable::readings(std::string_view character) const {
  static const std::vector<std::string> kNone;
  const auto it = readings_.find(std::string(character));
  return it == readings_.end() ? kNone : it->second;
}

SyllableTokenMap SyllableTokenMap::build(const VocabIndex& vocab, const CharPinyinTable& readings) {
  SyllableTokenMap map;
  for (std::size_t row = 0; row < vocab.size(); ++row) {
    const std::string& name = vocab.name(row);
    if (!single_code_point(name)) continue;
    for (const std::string& syllable : readings.readings(name)) map.add(syllable, row);
  }
  return map;
}

void SyllableTokenMap::add(std::string_view syllable, std::size_t row) {
  auto insert = [row](std::vector<std::size_t>& rows) {
    const auto at = std::lower_bound(rows.begin(), rows.end(), row);
    if (at == rows.end() || *at != row) rows.insert(at, row);
  };
  insert(exact_[std::string(syllable)]);
  insert(toneless_[std::string(strip_tone(syllable))]);
}

std::vector<std::size_t> SyllableTokenMap::tokens_for(std::string_view syllable) const {
  if (const auto it = exact_.find(std::string(syllable)); it != exact_.end()) return it->second;
  if (const auto it = toneless_.find(std::string(strip_tone(syllable))); it != toneless_.end()) {
    return it->second;
  }
  return {};
}

VocabEmbedding extend_vocab(VocabEmbedding model, std::span<const std::string> fragments) {
  VocabIndex vocab = model.vocab;
  for (const std::string& fragment : fragments) vocab.add(braille_token_name(fragment));
  model.table.append_zero_rows(vocab.size() - model.vocab.size());
  model.vocab = std::move(vocab);
  return model;
}

std::vector<double> init_chinese(VocabEmbedding& model, const SyllableTokenMap& syllables,
                                 const KnowledgeBase& kc, std::string_view fragment,
                                 std::optional<std::string_view> syllable) {
  const auto counterparts = kc.lookup(fragment);
  if (counterparts.empty()) {
    throw Error("UnknownFragment", "fragment '" + std::string(fragment) + "' is not in the Chinese knowledge base");
  }
  std::string chosen;
  if (syllable) {
    if (std::find(counterparts.begin(), counterparts.end(), *syllable) == counterparts.end()) {
      throw Error("UnknownFragment", "fragment '" + std::string(fragment) + "' has no syllable " +
                                         std::string(*syllable));
    }
    chosen = *syllable;
  } else if (counterparts.size() > 1) {
    throw Error("AmbiguousSyllable", "fragment '" + std::string(fragment) + "' maps to " +
                                         std::to_string(counterparts.size()) + " syllables");
  } else {
    chosen = counterparts.front();
  }
  const std::size_t target = braille_row(model, fragment);
  const auto rows = syllables.tokens_for(chosen);
  if (rows.empty()) throw Error("EmptySyllableSet", "no vocabulary tokens for syllable " + chosen);
  auto staged = mean_of_rows(model.table, rows);
  publish(model.table, target, staged);
  return staged;
}

std::vector<double> init_english(VocabEmbedding& model, const KnowledgeBase& ke, std::string_view fragment) {
  const auto words = ke.lookup(fragment);
  if (words.empty()) {
    throw Error("UnknownFragment", "fragment '" + std::string(fragment) + "' is not in the English knowledge base");
  }
  const std::string& word = words.front();
  const std::size_t target = braille_row(model, fragment);

  std::vector<double> staged;
  if (const auto row = model.vocab.find(word)) {
    const auto source = model.table.row(*row);
    staged.assign(source.begin(), source.end());
  } else {
    std::vector<std::size_t> pieces;
    std::size_t at = 0;
    while (at < word.size()) {
      std::size_t taken = 0;
      for (std::size_t len = word.size() - at; len >= 1; --len) {
        if (const auto row = model.vocab.find(std::string_view(word).substr(at, len))) {
          pieces.push_back(*row);
          taken = len;
          break;
        }
      }
      if (taken == 0) throw Error("WordNotInVocab", "word '" + word + "' cannot be built from vocabulary tokens");
      at += taken;
    }
    staged = mean_of_rows(model.table, pieces);
  }
  publish(model.table, target, staged);
  return staged;
}

InitReport init_all(VocabEmbedding& model, const KnowledgeBase& kc, const KnowledgeBase& ke,
                    const SyllableTokenMap& syllables) {
  InitReport report;
  for (std::size_t row = 0; row < model.vocab.size(); ++row) {
    const std::string name = model.vocab.name(row);
    const auto fragment = fragment_of_token(name);
    if (!fragment) continue;
    try {
      if (kc.contains(*fragment)) {
        const auto syllable = kc.lookup(*fragment).front();
        init_chinese(model, syllables, kc, *fragment, syllable);
        ++report.chinese_inited;
      } else if (ke.contains(*fragment)) {
        init_english(model, ke, *fragment);
        ++report.english_inited;
      } else {
        report.skipped.push_back({name, "UnknownFragment"});
      }
    } catch (const Error& e) {
      report.skipped.push_back({name, e.kind()});
    }
  }
  return report;
}

}  // namespace braillekit
