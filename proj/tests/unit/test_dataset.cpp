#include <set>

#include "braillekit/dataset.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace braillekit;

namespace {

bool has_kind(const std::vector<Issue>& issues, IssueKind kind) {
  for (const Issue& i : issues) {
    if (i.kind == kind) return true;
  }
  return false;
}

std::size_t occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (haystack.compare(i, needle.size(), needle) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("normalize canonicalises math spans") {
  CHECK(normalize("$\\frac {3}{m+1} $") == "$\\frac{3}{m+1}$");
  CHECK(normalize("$\\frac{3}{m+1}$") == "$\\frac{3}{m+1}$");
  CHECK(normalize("$ \\dfrac{1}{2}$") == "$\\frac{1}{2}$");
  CHECK(normalize("a\x01" "b") == "ab");
  CHECK(normalize("e\xCC\x81") == "\xC3\xA9");
  CHECK(normalize("") == "");
  try {
    normalize("$x$ and $");
    FAIL("expected UnbalancedMathDelimiters");
  } catch (const Error& e) {
    CHECK(e.kind() == "UnbalancedMathDelimiters");
  }
}

TEST_CASE("normalize is idempotent") {
  Rng rng(17);
  const std::vector<std::string> pieces{"x", " ", "$", "\\frac", "{", "}", "1", "2", "\\dfrac", "经", "  ", "=",
                                        "\t", "{{", "}}", "e\xCC\x81", "\\sqrt", "+"};
  std::size_t checked = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (std::size_t k = 0, n = rng.index(12); k < n; ++k) s += pieces[rng.index(pieces.size())];
    std::string once;
    try {
      once = normalize(s);
    } catch (const Error& e) {
      CHECK(e.kind() == "UnbalancedMathDelimiters");
      continue;
    }
    ++checked;
    CHECK(normalize(once) == once);
  }
  CHECK(checked > 500);
}

TEST_CASE("golden pair fixture validates") {
  const auto corpus = read_corpus(testing::data("corpus/golden_pairs.jsonl"));
  REQUIRE(corpus.size() == 6);
  for (const auto& ex : corpus) {
    const auto issues = validate_example(ex);
    CHECK_MESSAGE(issues.empty(), ex.id);
    CHECK(example_from_json(example_to_json(ex)) == ex);
  }
}

TEST_CASE("validate_example flags problems") {
  ParallelExample ex;
  ex.text = "经济";
  ex.braille = "G*aGI";
  CHECK(has_kind(validate_example(ex), IssueKind::InvalidBrailleAscii));
  ex.braille = "G*A  GI";
  CHECK(has_kind(validate_example(ex), IssueKind::MalformedBrailleSpacing));
  ex.braille = "G*A GI";
  ex.alignment = {{0, 1, 0, 3}, {1, 3, 4, 6}};
  CHECK(has_kind(validate_example(ex), IssueKind::AlignmentOutOfBounds));
  ex.alignment = {{1, 2, 4, 6}, {0, 1, 0, 3}};
  CHECK(has_kind(validate_example(ex), IssueKind::AlignmentNotMonotone));
  ex.alignment = {{0, 1, 0, 3}};
  CHECK(has_kind(validate_example(ex), IssueKind::AlignmentGap));
  ex.alignment.clear();
  ex.text = "$\\frac{1}{$";
  CHECK(has_kind(validate_example(ex), IssueKind::MalformedLatex));
  ex.text = "";
  ex.braille = "";
  const auto empty = validate_example(ex);
  CHECK(has_kind(empty, IssueKind::EmptyText));
  CHECK(has_kind(empty, IssueKind::EmptyBraille));
}

TEST_CASE("overlapping alignments are always flagged") {
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    ParallelExample ex = testing::aligned_example(2 + rng.index(6), rng.next());
    REQUIRE(validate_example(ex).empty());
    // Stretch one pair into its right neighbour on one side.
    const std::size_t k = rng.index(ex.alignment.size() - 1);
    if (rng.coin()) ex.alignment[k].text_end = ex.alignment[k + 1].text_start + 1;
    else ex.alignment[k].braille_end = ex.alignment[k + 1].braille_start + 1;
    bool overlaps = false;
    for (std::size_t a = 0; a < ex.alignment.size(); ++a) {
      for (std::size_t b = a + 1; b < ex.alignment.size(); ++b) {
        const auto& x = ex.alignment[a];
        const auto& y = ex.alignment[b];
        overlaps |= std::max(x.text_start, y.text_start) < std::min(x.text_end, y.text_end);
        overlaps |= std::max(x.braille_start, y.braille_start) < std::min(x.braille_end, y.braille_end);
      }
    }
    REQUIRE(overlaps);
    CHECK(has_kind(validate_example(ex), IssueKind::AlignmentOverlap));
  }
}

TEST_CASE("dedup") {
  ParallelExample a;
  a.text = "经济";
  a.braille = "G*AGI";
  ParallelExample b = a;
  b.id = "second";
  CHECK(dedup({a, b}).size() == 1);
  b.text = "发展";
  CHECK(dedup({a, b}).size() == 2);
}

TEST_CASE("dedup matches a hash-set oracle on 10,000 rows") {
  Rng rng(2024);
  std::vector<ParallelExample> corpus;
  for (int i = 0; i < 10000; ++i) {
    ParallelExample ex;
    ex.id = std::to_string(i);
    ex.braille = "A";
    const std::size_t v = rng.index(6000);
    ex.text = "row " + std::to_string(v);
    if (rng.index(4) == 0) ex.text = "row  " + std::to_string(v) + "\x01";
    if (rng.index(5) == 0) ex.text = "$ \\frac{" + std::to_string(v % 50) + "}{2}$";
    corpus.push_back(ex);
  }
  std::set<std::string> seen;
  std::vector<std::string> expected;
  for (const auto& ex : corpus) {
    if (seen.insert(normalize(ex.text)).second) expected.push_back(ex.id);
  }
  const auto kept = dedup(corpus);
  REQUIRE(kept.size() == expected.size());
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].id == expected[i]);
}

TEST_CASE("templates and rendering") {
  const auto templates = load_templates(testing::data("templates/instructions.txt"));
  REQUIRE(templates.size() == 6);
  CHECK(templates[0].id == "instructions:2");
  const auto corpus = read_corpus(testing::data("corpus/golden_pairs.jsonl"));
  const auto rec = render_instruction(templates[0], corpus[0], Direction::BrailleToText);
  CHECK(rec.instruction == "Please translate the following Braille into plain text: G*AGI D KYSU F9/V'");
  CHECK(rec.input == "G*AGI D KYSU F9/V'");
  CHECK(rec.expected_output == "经济的快速发展");
  const auto json = nlohmann::json::parse(record_to_json(rec));
  CHECK(json["output"] == "经济的快速发展");

  const auto t2b = render_instruction(templates[2], corpus[0], Direction::TextToBraille);
  CHECK(t2b.instruction == "Convert this Chinese text into Braille ASCII: 经济的快速发展");
  CHECK(t2b.expected_output == "G*AGI D KYSU F9/V'");

  auto kind_of = [&](const InstructionTemplate& t) {
    try {
      render_instruction(t, corpus[0], Direction::BrailleToText);
    } catch (const Error& e) {
      return e.kind();
    }
    return std::string("none");
  };
  CHECK(kind_of({"x", "Translate this."}) == "UnknownPlaceholder");
  CHECK(kind_of({"x", "Translate {inptu}"}) == "UnknownPlaceholder");
  CHECK(kind_of({"x", "{input} and again {input}"}) == "InputNotVerbatim");
  CHECK(parse_direction("b2t") == Direction::BrailleToText);
  CHECK_THROWS_AS(parse_direction("sideways"), Error);
}

TEST_CASE("50 templates x 20 examples keep the input verbatim once") {
  Rng rng(50);
  const std::vector<std::string> words{"please", "read", "this", "now", "and", "write", "out", "the", "text", "braille"};
  std::vector<InstructionTemplate> templates;
  for (int t = 0; t < 50; ++t) {
    std::string text;
    const std::size_t before = rng.index(6);
    const std::size_t after = rng.index(4);
    for (std::size_t i = 0; i < before; ++i) text += words[rng.index(words.size())] + " ";
    if (rng.coin()) text += "({language}) ";
    if (rng.coin()) text += "[{task}] ";
    text += "{input}";
    for (std::size_t i = 0; i < after; ++i) text += " " + words[rng.index(words.size())];
    templates.push_back({"gen:" + std::to_string(t), text});
  }
  std::vector<ParallelExample> examples;
  for (int e = 0; e < 20; ++e) {
    ParallelExample ex = testing::aligned_example(1 + rng.index(5), rng.next());
    ex.language = rng.coin() ? Language::Chinese : Language::English;
    examples.push_back(ex);
  }
  std::size_t records = 0;
  for (const auto& t : templates) {
    for (const auto& ex : examples) {
      for (Direction d : {Direction::BrailleToText, Direction::TextToBraille}) {
        const auto rec = render_instruction(t, ex, d);
        CHECK(occurrences(rec.instruction, rec.input) == 1);
        if (d == Direction::BrailleToText) ++records;
      }
    }
  }
  CHECK(records == 1000);
}

TEST_CASE("corpus JSON parsing errors") {
  CHECK_THROWS_AS(example_from_json("{not json"), Error);
  CHECK_THROWS_AS(example_from_json(R"({"id":"x","language":"fr","text":"a","braille":"A"})"), Error);
  const auto ex = example_from_json(R"({"id":"x","language":"en","text":"a","braille":"A","alignment":[[0,1,0,1]]})");
  CHECK(ex.language == Language::English);
  REQUIRE(ex.alignment.size() == 1);
  CHECK(ex.alignment[0].braille_end == 1);
}
