#include <algorithm>

#include "braillekit/tokenizer.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace braillekit;

namespace {

const KnowledgeBase& zh() {
  static const KnowledgeBase kb = [] {
    KnowledgeBase k = KnowledgeBase::load(testing::data("kb/zh_prior.tsv"), Language::Chinese);
    k.load_words(testing::data("kb/words.tsv"));
    return k;
  }();
  return kb;
}

std::string strip_spaces(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  return s;
}

struct Best {
  std::size_t coverage = 0;
  std::size_t tokens = 0;
};

// Every segmentation whose pieces are KB fragments or single cells.
Best brute_force(const std::string& word, const KnowledgeBase& kb) {
  const std::size_t n = word.size();
  Best best{0, n + 1};
  for (std::uint32_t cuts = 0; cuts < (1U << (n - 1)); ++cuts) {
    std::size_t start = 0;
    std::size_t coverage = 0;
    std::size_t tokens = 0;
    bool ok = true;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i == n || (cuts >> (i - 1)) & 1U) {
        const std::string piece = word.substr(start, i - start);
        if (kb.contains(piece)) coverage += piece.size();
        else if (piece.size() > 1) ok = false;
        ++tokens;
        start = i;
      }
    }
    if (!ok) continue;
    if (coverage > best.coverage || (coverage == best.coverage && tokens < best.tokens)) best = {coverage, tokens};
  }
  return best;
}

}  // namespace

TEST_CASE("Chinese golden pair tokenizes into the listed tokens") {
  const auto t = segment(BrailleSequence::parse("G*AGI D KYSU F9/V'"), zh());
  CHECK(t.render_tokens() == "<|G*A|><|GI|><|D|><|KY|><|SU|><|F9|><|/V'|>");
  CHECK(t.word_boundaries == std::vector<std::size_t>{2, 3, 5});
  CHECK(t.reconstruct() == "G*AGI D KYSU F9/V'");
  const auto c = map_counterparts(segment(BrailleSequence::parse("G*AGI D F9/V'"), zh()), zh());
  CHECK(c == std::vector<std::string>{"jing1", "ji4", "de", "fa1", "zhan3"});
  CHECK(map_counterparts(segment(BrailleSequence::parse("HV2"), zh()), zh()) == std::vector<std::string>{"han4"});
  CHECK(map_counterparts(segment(BrailleSequence(), zh()), zh()).empty());
}

TEST_CASE("OOV cells become single tokens") {
  const auto t = segment(BrailleSequence::parse("ZZG*A"), zh());
  REQUIRE(t.tokens.size() == 3);
  CHECK(t.tokens[0].oov());
  CHECK(t.tokens[0].fragment == "Z");
  CHECK(t.tokens[2].counterpart == "jing1");
  CHECK(map_counterparts(t, zh())[0] == kOovCounterpart);
  CHECK(t.tokens[2].start == 2);
  CHECK(t.tokens[2].end == 5);
}

TEST_CASE("jsonl output") {
  const auto t = segment(BrailleSequence::parse("G*A Z"), zh());
  std::istringstream lines(t.to_jsonl());
  std::string line;
  std::getline(lines, line);
  const auto first = nlohmann::json::parse(line);
  CHECK(first["fragment"] == "G*A");
  CHECK(first["counterpart"] == "jing1");
  std::getline(lines, line);
  CHECK(nlohmann::json::parse(line)["counterpart"].is_null());
}

TEST_CASE("segmentation is lossless and DP-optimal against brute force") {
  Rng rng(21);
  for (int trial = 0; trial < 150; ++trial) {
    KnowledgeBase kb(Language::English);
    const std::string alphabet = "ABCD";
    for (int f = 0, n = 2 + static_cast<int>(rng.index(8)); f < n; ++f) {
      std::string frag;
      for (std::size_t k = 0, len = 1 + rng.index(3); k < len; ++k) frag += alphabet[rng.index(4)];
      if (kb.contains(frag)) continue;
      kb.add_prior({BrailleFragment::parse(frag), "w" + std::to_string(f), Language::English, 1});
    }
    std::vector<std::string> words;
    for (std::size_t w = 0, n = 1 + rng.index(3); w < n; ++w) {
      std::string word;
      for (std::size_t k = 0, len = 1 + rng.index(8); k < len; ++k) word += alphabet[rng.index(4)];
      words.push_back(word);
    }
    const auto seq = BrailleSequence::from_words(words);
    const auto t = segment(seq, kb);
    CHECK(t.reconstruct() == seq.str());
    std::size_t pos = 0;
    for (const Token& tok : t.tokens) {
      while (pos < seq.str().size() && seq.str()[pos] == ' ') ++pos;
      CHECK(tok.start == pos);
      CHECK(seq.str().substr(tok.start, tok.end - tok.start) == tok.fragment);
      pos = tok.end;
    }
    for (const std::string& word : words) {
      const auto pieces = segment_word(word, kb);
      std::size_t coverage = 0;
      std::string joined;
      for (const auto& p : pieces) {
        if (kb.contains(p)) coverage += p.size();
        else CHECK(p.size() == 1);
        joined += p;
      }
      CHECK(joined == word);
      const Best best = brute_force(word, kb);
      CHECK(coverage == best.coverage);
      CHECK(pieces.size() == best.tokens);
    }
  }
}

TEST_CASE("word segmentation golden and properties") {
  CHECK(word_segment("G*AGIDKYSU F9/V'", zh()).str() == "G*AGI D KYSU F9/V'");
  CHECK(word_segment("G*AGIDKYSUF9/V'", zh()).str() == "G*AGI D KYSU F9/V'");
  CHECK(word_segment("G*AGI", zh()).str() == "G*AGI");
  CHECK(word_segment("", zh()).str().empty());
  const KnowledgeBase empty(Language::Chinese);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const std::string s = testing::random_cells(rng, 6);
    CHECK(word_segment(s, empty).str() == s);
    const std::string mixed = "G*AGI" + s + "KYSU";
    CHECK(strip_spaces(word_segment(mixed, zh()).str()) == mixed);
    CHECK(word_segment(mixed, zh()) == word_segment(mixed, zh()));
  }
  CHECK_THROWS_AS(word_segment("G*a", zh()), PositionedError);
}
