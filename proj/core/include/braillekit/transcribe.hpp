#pragma once

// Rule-driven transcription of mixed prose and `$...$` math into Braille
// ASCII, used to generate parallel fixtures.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "braillekit/bkft.hpp"
#include "braillekit/braille.hpp"
#include "braillekit/knowledge_base.hpp"

namespace braillekit {

enum class RuleDomain { TextEnglish, PinyinChinese, Math };

std::string_view to_string(RuleDomain domain) noexcept;
// "text-en", "pinyin-zh", "math"; throws Error("ParseError").
RuleDomain parse_rule_domain(std::string_view name);

// A rewrite rule. The pattern is an ECMAScript regex matched at the current
// position; `^` only matches at the start of the span and `$` at its end.
//
// Emission syntax:
//   {N}      capture group N verbatim (0 is the whole match)
//   {N:up}   capture N upper-cased
//   {N:num}  digits of capture N as letters A-J (1->A ... 9->I, 0->J)
//   \s       word break
//   \\       a literal backslash cell
struct Rule {
  RuleDomain domain = RuleDomain::Math;
  std::string pattern;
  std::string emission;
  std::regex compiled;
  std::size_t line = 0;
};

// Ordered rules per domain; the first rule that matches wins.
class RuleSet {
 public:
  // Rows: `domain \t pattern \t emission [\t comment]`.
  static RuleSet load(const std::filesystem::path& path);
  static RuleSet parse(std::istream& in);

  void add(RuleDomain domain, std::string pattern, std::string emission, std::size_t line = 0);
  std::vector<const Rule*> rules(RuleDomain domain) const;
  std::size_t size() const noexcept { return rules_.size(); }

  // Rewrites `text` (one span). Word breaks come back as spaces and may be
  // doubled or leading; callers split on whitespace. Throws
  // PositionedError("UntranscribableSymbol") with a byte offset into `text`.
  std::string apply(RuleDomain domain, std::string_view text) const;

 private:
  std::vector<Rule> rules_;
};

struct TranscribeContext {
  const RuleSet* rules = nullptr;
  const KnowledgeBase* chinese = nullptr;  // K_C, used through inverse lookup
  const KnowledgeBase* english = nullptr;  // K_E
  const CharPinyinTable* char_pinyin = nullptr;
};

// Splits `text` into math spans and prose. Math goes through the math rules.
// Chinese prose needs per-word Pinyin (`pinyin`, one entry per word, e.g.
// {"gu4", "da2an4", "wei2"}); without it every character is looked up in the
// char_pinyin table and becomes its own word. Punctuation uses the pinyin-zh
// rules and attaches to the preceding word. English prose uses whole-word K_E
// matches, then longest in-word matches, then single letters, with capital
// signs; other symbols use the text-en rules. Pieces are joined with single
// spaces. Throws PositionedError("UntranscribableSymbol") with a code point
// offset into `text`.
BrailleSequence transcribe_mixed(std::string_view text, const TranscribeContext& context,
                                 const std::vector<std::string>& pinyin = {});

// Splits "da2an4" or "xi'an" into syllables.
std::vector<std::string> split_pinyin_word(std::string_view word);

}  // namespace braillekit
