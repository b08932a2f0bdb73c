#include "braillekit/dataset.hpp"
#include "braillekit/transcribe.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace braillekit;

namespace {

struct Fixture {
  RuleSet rules = RuleSet::load(testing::data("rules/math_braille.tsv"));
  KnowledgeBase kc = KnowledgeBase::load(testing::data("kb/zh_prior.tsv"), Language::Chinese);
  KnowledgeBase ke = KnowledgeBase::load(testing::data("kb/en_prior.tsv"), Language::English);
  CharPinyinTable readings = CharPinyinTable::load(testing::data("kb/char_pinyin.tsv"));
  TranscribeContext context() const { return {&rules, &kc, &ke, &readings}; }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

std::string run(std::string_view text, const std::vector<std::string>& pinyin = {}) {
  return transcribe_mixed(text, fx().context(), pinyin).str();
}

}  // namespace

TEST_CASE("formula golden pair") {
  CHECK(run("$\\frac{1}{4}x=15$") == "#A4;X 7#AE");
  CHECK(run("$frac{1}{4}x=15$") == "#A4;X 7#AE");
  CHECK(run(normalize("$ \\dfrac {1}{4} x = 15 $")) == "#A4;X 7#AE");
}

TEST_CASE("mixed Chinese golden pair") {
  CHECK(run("故答案为：$y$", {"gu4", "da2an4", "wei2"}) == "GU D91V W- #Y");
}

TEST_CASE("aligned golden pairs with pinyin reproduce their Braille") {
  std::size_t checked = 0;
  for (const auto& ex : read_corpus(testing::data("corpus/golden_pairs.jsonl"))) {
    if (ex.pinyin.empty()) continue;
    ++checked;
    CHECK_MESSAGE(run(ex.text, ex.pinyin) == ex.braille, ex.id);
  }
  CHECK(checked == 2);
}

TEST_CASE("character fallback makes one word per character") {
  CHECK(run("经济") == "G*A GI");
}

TEST_CASE("English prose") {
  CHECK(run("least") == "L1/");
  CHECK(run("The") == ",!");
  CHECK(run("x = 2") == "X 7 #B");
  CHECK(run("经济 GDP") == "G*A GI ,,GDP");
  CHECK(run("") == "");
}

TEST_CASE("errors") {
  try {
    run("ok ☃");
    FAIL("expected UntranscribableSymbol");
  } catch (const PositionedError& e) {
    CHECK(e.kind() == "UntranscribableSymbol");
    CHECK(e.position() == 3);
  }
  try {
    run("故答", {"gu4", "da2", "an4"});
    FAIL("expected PinyinMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == "PinyinMismatch");
  }
}

TEST_CASE("pinyin word splitting") {
  CHECK(split_pinyin_word("da2an4") == std::vector<std::string>{"da2", "an4"});
  CHECK(split_pinyin_word("xi'an") == std::vector<std::string>{"xi", "an"});
  CHECK(split_pinyin_word("Jing1ji4") == std::vector<std::string>{"jing1", "ji4"});
}

TEST_CASE("rule engine") {
  std::istringstream in("math\t[a-z]\t;{0:up}\nmath\t\\d+\t#{0:num}\nmath\t\\s+\t\n");
  const RuleSet rules = RuleSet::parse(in);
  CHECK(rules.size() == 3);
  CHECK(rules.apply(RuleDomain::Math, "x 10") == ";X#AJ");
  CHECK_THROWS_AS(rules.apply(RuleDomain::Math, "x?"), PositionedError);
  std::istringstream bad("physics\tx\ty\n");
  CHECK_THROWS_AS(RuleSet::parse(bad), Error);
  CHECK(parse_rule_domain("pinyin-zh") == RuleDomain::PinyinChinese);
}

TEST_CASE("output is deterministic and validates") {
  Rng rng(31);
  const std::vector<std::string> pieces{"经", "济", "的", "x", "$y$", "least", "The", " ", "，", "。", "$\\frac{2}{3}$",
                                        "12", "and", "for"};
  for (int i = 0; i < 300; ++i) {
    std::string s;
    for (std::size_t k = 0, n = 1 + rng.index(6); k < n; ++k) s += pieces[rng.index(pieces.size())];
    std::string out;
    try {
      out = run(s);
    } catch (const Error& e) {
      FAIL_CHECK(e.kind() << " for '" << s << "': " << std::string(e.what()));
      continue;
    }
    CHECK(out == run(s));
    CHECK(validate(out).ok());
    CHECK_NOTHROW(BrailleSequence::parse(out));
  }
}
