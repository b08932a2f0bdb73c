#include "braillekit/transcribe.hpp"

#include <fstream>

#include "braillekit/error.hpp"
#include "braillekit/text_util.hpp"

namespace braillekit {

std::string_view to_string(RuleDomain domain) noexcept {
  switch (domain) {
    case RuleDomain::TextEnglish: return "text-en";
    case RuleDomain::PinyinChinese: return "pinyin-zh";
    case RuleDomain::Math: return "math";
  }
  return "math";
}

RuleDomain parse_rule_domain(std::string_view name) {
  if (name == "text-en") return RuleDomain::TextEnglish;
  if (name == "pinyin-zh") return RuleDomain::PinyinChinese;
  if (name == "math") return RuleDomain::Math;
  throw Error("ParseError", "unknown rule domain '" + std::string(name) + "'");
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("FileNotFound", "cannot open " + path.string());
  return parse(in);
}

RuleSet RuleSet::parse(std::istream& in) {
  RuleSet set;
  for (const TsvRow& row : read_tsv(in)) {
    if (row.fields.size() < 2 || row.fields.size() > 4) {
      throw Error("ParseError", "rules line " + std::to_string(row.line) + ": expected domain, pattern, emission");
    }
    const std::string emission = row.fields.size() >= 3 ? row.fields[2] : std::string();
    try {
      set.add(parse_rule_domain(row.fields[0]), row.fields[1], emission, row.line);
    } catch (const Error& e) {
      throw Error("ParseError", "rules line " + std::to_string(row.line) + ": " + e.what());
    }
  }
  return set;
}

void RuleSet::add(RuleDomain domain, std::string pattern, std::string emission, std::size_t line) {
  if (pattern.empty()) throw Error("ParseError", "empty rule pattern");
  Rule rule;
  rule.domain = domain;
  try {
    rule.compiled = std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error("ParseError", "bad pattern '" + pattern + "': " + e.what());
  }
  rule.pattern = std::move(pattern);
  rule.emission = std::move(emission);
  rule.line = line;
  rules_.push_back(std::move(rule));
}

std::vector<const Rule*> RuleSet::rules(RuleDomain domain) const {
  std::vector<const Rule*> out;
  for (const Rule& rule : rules_) {
    if (rule.domain == domain) out.push_back(&rule);
  }
  return out;
}

namespace {

char digit_letter(char digit) { return digit == '0' ? 'J' : static_cast<char>('A' + (digit - '1')); }

std::string expand(const Rule& rule, const std::cmatch& match) {
  std::string out;
  const std::string& e = rule.emission;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == '\\' && i + 1 < e.size()) {
      out.push_back(e[i + 1] == 's' ? ' ' : e[i + 1]);
      ++i;
      continue;
    }
    if (e[i] != '{') {
      out.push_back(e[i]);
      continue;
    }
    const std::size_t close = e.find('}', i);
    if (close == std::string::npos) throw Error("ParseError", "unterminated placeholder in rule line " + std::to_string(rule.line));
    const std::string_view spec = std::string_view(e).substr(i + 1, close - i - 1);
    const std::size_t colon = spec.find(':');
    const std::string_view group_text = spec.substr(0, colon);
    const std::string_view transform = colon == std::string_view::npos ? std::string_view() : spec.substr(colon + 1);
    const std::size_t group = static_cast<std::size_t>(std::stoul(std::string(group_text)));
    if (group >= match.size()) throw Error("ParseError", "rule line " + std::to_string(rule.line) + " has no group " + std::to_string(group));
    std::string value = match[group].str();
    if (transform == "up") {
      for (char& c : value) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      }
    } else if (transform == "num") {
      for (char& c : value) {
        if (c >= '0' && c <= '9') c = digit_letter(c);
      }
    } else if (!transform.empty()) {
      throw Error("ParseError", "unknown transform '" + std::string(transform) + "' in rule line " + std::to_string(rule.line));
    }
    out += value;
    i = close;
  }
  return out;
}

std::size_t code_point_offset(std::string_view text, std::size_t byte) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xc0) != 0x80) ++count;
  }
  return count;
}

}  // namespace

std::string RuleSet::apply(RuleDomain domain, std::string_view text) const {
  const auto candidates = rules(domain);
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    bool matched = false;
    for (const Rule* rule : candidates) {
      std::cmatch match;
      auto flags = std::regex_constants::match_continuous | std::regex_constants::match_not_null;
      if (pos > 0) flags |= std::regex_constants::match_prev_avail | std::regex_constants::match_not_bol;
      if (std::regex_search(text.data() + pos, text.data() + text.size(), match, rule->compiled, flags)) {
        out += expand(*rule, match);
        pos += static_cast<std::size_t>(match.length(0));
        matched = true;
        break;
      }
    }
    if (!matched) {
      std::size_t end = pos + 1;
      while (end < text.size() && (static_cast<unsigned char>(text[end]) & 0xc0) == 0x80) ++end;
      throw PositionedError("UntranscribableSymbol", pos,
                            "no " + std::string(to_string(domain)) + " rule for '" +
                                std::string(text.substr(pos, end - pos)) + "'");
    }
  }
  return out;
}

std::vector<std::string> split_pinyin_word(std::string_view word) {
  std::vector<std::string> syllables;
  std::string current;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const char c = word[i];
    if (c >= '1' && c <= '5') {
      current.push_back(c);
      syllables.push_back(std::move(current));
      current.clear();
    } else if (c == '\'' || c == '-') {
      if (!current.empty()) syllables.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    }
  }
  if (!current.empty()) syllables.push_back(std::move(current));
  return syllables;
}

namespace {

// Accumulates output words; `open` allows punctuation to attach to the last one.
class WordSink {
 public:
  void start_word(std::string text) {
    words_.push_back(std::move(text));
    open_ = true;
  }
  void extend(std::string_view text) {
    if (words_.empty() || !open_) {
      start_word(std::string(text));
    } else {
      words_.back() += text;
    }
  }
  void close() { open_ = false; }
  // Appends rule output: leading breaks close the current word, inner breaks
  // start new ones.
  void append_rules(std::string_view emitted, bool attach) {
    if (!emitted.empty() && emitted.front() == ' ') close();
    bool first = true;
    for (std::string_view piece : split_whitespace(emitted)) {
      if (first && attach) extend(piece);
      else start_word(std::string(piece));
      first = false;
    }
    if (!emitted.empty() && emitted.back() == ' ') close();
  }
  std::vector<std::string> take() { return std::move(words_); }

 private:
  std::vector<std::string> words_;
  bool open_ = false;
};

struct Decoded {
  std::u32string code_points;
  std::vector<std::size_t> byte_offsets;  // size + 1 entries
};

Decoded decode_with_offsets(std::string_view text) {
  Decoded d;
  d.code_points = decode_utf8(text);
  std::size_t byte = 0;
  for (char32_t c : d.code_points) {
    d.byte_offsets.push_back(byte);
    byte += c < 0x80 ? 1 : c < 0x800 ? 2 : c < 0x10000 ? 3 : 4;
  }
  d.byte_offsets.push_back(byte);
  return d;
}

void rethrow_at(const PositionedError& e, std::string_view text, std::size_t base_byte) {
  throw PositionedError(e.kind(), code_point_offset(text, base_byte + e.position()), e.what());
}

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string english_letters(std::string_view letters, const KnowledgeBase* english) {
  std::string out;
  bool all_upper = letters.size() > 1;
  for (char c : letters) all_upper = all_upper && c >= 'A' && c <= 'Z';
  if (all_upper) out += ",,";
  else if (letters.front() >= 'A' && letters.front() <= 'Z') out += ",";

  const std::string lower = to_lower_ascii(letters);
  if (english != nullptr) {
    if (const auto whole = english->inverse_lookup(lower); !whole.empty()) return out + whole.front();
  }
  std::size_t i = 0;
  while (i < lower.size()) {
    std::size_t taken = 0;
    if (english != nullptr) {
      for (std::size_t len = lower.size() - i; len >= 2; --len) {
        if (const auto part = english->inverse_lookup(std::string_view(lower).substr(i, len)); !part.empty()) {
          out += part.front();
          taken = len;
          break;
        }
      }
    }
    if (taken == 0) {
      out.push_back(static_cast<char>(lower[i] - 'a' + 'A'));
      taken = 1;
    }
    i += taken;
  }
  return out;
}

bool is_ascii_letter_cp(char32_t c) { return c < 0x80 && is_ascii_letter(static_cast<char>(c)); }

void transcribe_chinese(std::string_view text, std::size_t begin, std::size_t end, const TranscribeContext& context,
                        const std::vector<std::vector<std::string>>& pinyin_words, std::size_t& word_cursor,
                        std::size_t& syllable_cursor, WordSink& sink) {
  const Decoded d = decode_with_offsets(text.substr(begin, end - begin));
  std::size_t i = 0;
  while (i < d.code_points.size()) {
    const char32_t c = d.code_points[i];
    const std::size_t at = begin + d.byte_offsets[i];
    if (is_unicode_space(c)) {
      sink.close();
      ++i;
      continue;
    }
    if (is_han(c)) {
      std::string syllable;
      bool new_word = true;
      if (!pinyin_words.empty()) {
        if (word_cursor >= pinyin_words.size()) {
          throw PositionedError("UntranscribableSymbol", code_point_offset(text, at), "Pinyin runs out before this character");
        }
        syllable = pinyin_words[word_cursor][syllable_cursor];
        new_word = syllable_cursor == 0;
        if (++syllable_cursor == pinyin_words[word_cursor].size()) {
          ++word_cursor;
          syllable_cursor = 0;
        }
      } else {
        std::string character;
        append_utf8(character, c);
        const auto& readings = context.char_pinyin != nullptr ? context.char_pinyin->readings(character)
                                                              : std::vector<std::string>{};
        if (readings.empty()) {
          throw PositionedError("UntranscribableSymbol", code_point_offset(text, at), "no Pinyin for '" + character + "'");
        }
        syllable = readings.front();
      }
      const auto fragments = context.chinese != nullptr ? context.chinese->inverse_lookup(syllable)
                                                        : std::vector<std::string>{};
      if (fragments.empty()) {
        throw PositionedError("UntranscribableSymbol", code_point_offset(text, at),
                              "no Braille fragment for syllable " + syllable);
      }
      if (new_word) sink.start_word(fragments.front());
      else sink.extend(fragments.front());
      ++i;
      continue;
    }
    // Latin words are spelled as English; other symbols go through the pinyin-zh rules.
    const bool letters = is_ascii_letter_cp(c);
    std::size_t j = i;
    while (j < d.code_points.size() && !is_han(d.code_points[j]) && !is_unicode_space(d.code_points[j]) &&
           is_ascii_letter_cp(d.code_points[j]) == letters) {
      ++j;
    }
    const std::size_t run_begin = begin + d.byte_offsets[i];
    const std::size_t run_end = begin + d.byte_offsets[j];
    const std::string_view run = text.substr(run_begin, run_end - run_begin);
    if (letters) {
      sink.start_word(english_letters(run, context.english));
      sink.close();
    } else {
      try {
        sink.append_rules(context.rules->apply(RuleDomain::PinyinChinese, run), true);
      } catch (const PositionedError& e) {
        rethrow_at(e, text, run_begin);
      }
    }
    i = j;
  }
}

void transcribe_english(std::string_view text, std::size_t begin, std::size_t end, const TranscribeContext& context,
                        WordSink& sink) {
  std::size_t i = begin;
  while (i < end) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      sink.close();
      ++i;
      continue;
    }
    std::size_t j = i;
    const bool letters = is_ascii_letter(c);
    while (j < end && text[j] != ' ' && text[j] != '\t' && text[j] != '\n' && text[j] != '\r' &&
           is_ascii_letter(text[j]) == letters) {
      ++j;
    }
    if (letters) {
      sink.extend(english_letters(text.substr(i, j - i), context.english));
    } else {
      try {
        sink.append_rules(context.rules->apply(RuleDomain::TextEnglish, text.substr(i, j - i)), true);
      } catch (const PositionedError& e) {
        rethrow_at(e, text, i);
      }
    }
    i = j;
  }
}

}  // namespace

BrailleSequence transcribe_mixed(std::string_view text, const TranscribeContext& context,
                                 const std::vector<std::string>& pinyin) {
  if (context.rules == nullptr) throw Error("InvalidArgument", "transcription needs a rule set");

  std::vector<std::vector<std::string>> pinyin_words;
  for (const std::string& word : pinyin) {
    auto syllables = split_pinyin_word(word);
    if (!syllables.empty()) pinyin_words.push_back(std::move(syllables));
  }

  bool chinese = false;
  for (char32_t c : decode_utf8(text)) {
    chinese = chinese || is_han(c) || (c >= 0x3000 && c <= 0x303F) || (c >= 0xFF00 && c <= 0xFFEF);
  }

  WordSink sink;
  std::size_t word_cursor = 0;
  std::size_t syllable_cursor = 0;
  std::size_t at = 0;
  auto prose = [&](std::size_t begin, std::size_t end) {
    if (begin >= end) return;
    if (chinese) transcribe_chinese(text, begin, end, context, pinyin_words, word_cursor, syllable_cursor, sink);
    else transcribe_english(text, begin, end, context, sink);
  };

  while (at < text.size()) {
    std::size_t open = text.find('$', at);
    while (open != std::string_view::npos && open > 0 && text[open - 1] == '\\') open = text.find('$', open + 1);
    if (open == std::string_view::npos) break;
    const std::size_t width = open + 1 < text.size() && text[open + 1] == '$' ? 2 : 1;
    const std::size_t close = text.find(std::string_view("$$", width), open + width);
    if (close == std::string_view::npos) {
      throw PositionedError("UntranscribableSymbol", code_point_offset(text, open), "unmatched math delimiter");
    }
    prose(at, open);
    sink.close();
    try {
      sink.append_rules(context.rules->apply(RuleDomain::Math, text.substr(open + width, close - open - width)), false);
    } catch (const PositionedError& e) {
      rethrow_at(e, text, open + width);
    }
    at = close + width;
  }
  prose(at, text.size());

  if (!pinyin_words.empty() && word_cursor != pinyin_words.size()) {
    throw Error("PinyinMismatch", "supplied Pinyin has more syllables than the text has characters");
  }
  return BrailleSequence::from_words(sink.take());
}

}  // namespace braillekit
