#include <algorithm>

#include "braillekit/knowledge_base.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace braillekit;

namespace {

const KnowledgeBase& zh() {
  static const KnowledgeBase kb = KnowledgeBase::load(testing::data("kb/zh_prior.tsv"), Language::Chinese);
  return kb;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

TEST_CASE("lookup orders by frequency") {
  const auto gi = zh().lookup("GI");
  REQUIRE(gi.size() == 2);
  CHECK(gi[0] == "ji4");
  CHECK(gi[1] == "ji1");
  CHECK(zh().lookup("HV2") == std::vector<std::string>{"han4"});
  CHECK(zh().lookup("ZZZ").empty());
}

TEST_CASE("inverse lookup and tone fallback") {
  CHECK(zh().inverse_lookup("jing1") == std::vector<std::string>{"G*A"});
  CHECK(zh().inverse_lookup("jing") == std::vector<std::string>{"G*A"});
  CHECK(zh().inverse_lookup("jing3") == std::vector<std::string>{"G*A"});
  CHECK(zh().inverse_lookup("nope4").empty());
}

TEST_CASE("index consistency over every entry") {
  for (const auto* kb : {&zh()}) {
    for (const PriorEntry& e : kb->entries()) {
      CHECK(kb->contains(e.fragment.str()));
      CHECK(contains(kb->lookup(e.fragment.str()), e.counterpart));
      CHECK(contains(kb->inverse_lookup(e.counterpart), e.fragment.str()));
      CHECK(is_pinyin_syllable(e.counterpart));
    }
  }
  const auto en = KnowledgeBase::load(testing::data("kb/en_prior.tsv"), Language::English);
  CHECK(en.lookup("L1/") == std::vector<std::string>{"least"});
  for (const PriorEntry& e : en.entries()) CHECK(contains(en.inverse_lookup(e.counterpart), e.fragment.str()));
}

TEST_CASE("loader reports every bad row") {
  try {
    testing::kb_from("G*A\tjing1\n# comment\nG*A\tjing1\nab\tji4\nGI\tnot-pinyin\nD\tde\t12x\n", Language::Chinese);
    FAIL("expected KbLoadError");
  } catch (const KbLoadError& e) {
    REQUIRE(e.rows().size() == 4);
    CHECK(e.rows()[0].line == 3);
    CHECK(e.rows()[0].kind == "DuplicateEntry");
    CHECK(e.rows()[1].line == 4);
    CHECK(e.rows()[1].kind == "ParseError");
    CHECK(e.rows()[2].line == 5);
    CHECK(e.rows()[3].line == 6);
  }
  CHECK_THROWS_AS(KnowledgeBase::load(testing::data("kb/missing.tsv"), Language::Chinese), Error);
}

TEST_CASE("pinyin syllable pattern") {
  CHECK(is_pinyin_syllable("han4"));
  CHECK(is_pinyin_syllable("de"));
  CHECK(is_pinyin_syllable("lü4"));
  CHECK_FALSE(is_pinyin_syllable("han6"));
  CHECK_FALSE(is_pinyin_syllable("4"));
  CHECK_FALSE(is_pinyin_syllable("Han4"));
  CHECK(strip_tone("han4") == "han");
}

TEST_CASE("similarity") {
  CHECK(similarity("IW", "IW2") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(similarity("IW", "IW") == 1.0);
  CHECK(similarity("", "") == 1.0);
  Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const std::string a = testing::random_cells(rng, 1 + rng.index(6));
    const std::string b = testing::random_cells(rng, 1 + rng.index(6));
    std::vector<unsigned> ma;
    std::vector<unsigned> mb;
    for (char c : a) ma.push_back(static_cast<unsigned>(kBrailleAscii.find(c)));
    for (char c : b) mb.push_back(static_cast<unsigned>(kBrailleAscii.find(c)));
    const double expected =
        1.0 - double(oracle::edit_distance(ma, mb)) / double(std::max(a.size(), b.size()));
    CHECK(similarity(a, b) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(similarity(a, b) == similarity(b, a));
    CHECK(similarity(a, b) >= 0.0);
    CHECK(similarity(a, b) <= 1.0);
    CHECK((similarity(a, b) == 1.0) == (a == b));
  }
}

TEST_CASE("attribute table") {
  KnowledgeBase kb;
  kb.load_attributes(testing::data("kb/attributes.tsv"));
  const auto labels = kb.attribute_labels();
  CHECK(contains(labels, "Verb"));
  CHECK(contains(labels, "Quantifier"));
  CHECK(contains(labels, "PersonalName"));
  CHECK(contains(labels, "PlaceName"));
  CHECK(kb.attribute_group("Quantifier").size() == 3);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const AttributeEntry& e = kb.sample_compatible("Quantifier", "IW", seed);
    CHECK(e.attribute == "Quantifier");
    CHECK(e.fragment.str() != "IW");
  }
  CHECK_THROWS_AS(kb.sample_compatible("Unknown", "", 0), Error);
  CHECK_THROWS_AS(kb.add_attribute({BrailleFragment::parse("IW"), "Quantifier", "一位"}), Error);
}

TEST_CASE("word inventory") {
  KnowledgeBase kb(Language::Chinese);
  kb.load_words(testing::data("kb/words.tsv"));
  const WordEntry* w = kb.find_word("G*AGI");
  REQUIRE(w != nullptr);
  CHECK(w->fragments.size() == 2);
  CHECK(kb.find_word("G*A") == nullptr);
}
