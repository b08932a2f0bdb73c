#include <set>

#include "braillekit/braille.hpp"
#include "braillekit/text_util.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace braillekit;

TEST_CASE("table matches the published chart") {
  const auto& chart = oracle::chart();
  REQUIRE(chart.size() == 64);
  std::set<char> seen;
  for (const auto& row : chart) {
    seen.insert(row.ascii);
    CHECK_MESSAGE(kBrailleAscii[oracle::dots_to_mask(row.dots)] == row.ascii, row.ascii);
  }
  CHECK(seen.size() == 64);
}

TEST_CASE("shipped TSV agrees with the constant") {
  const auto rows = read_tsv_file(testing::data("tables/braille_ascii.tsv"));
  REQUIRE(rows.size() == 64);
  for (const TsvRow& row : rows) {
    REQUIRE(row.fields.size() >= 3);
    const unsigned mask = static_cast<unsigned>(std::stoul(row.fields[0]));
    CHECK(row.fields[1].size() == 1);
    CHECK(row.fields[1][0] == kBrailleAscii[mask]);
    char hex[16];
    std::snprintf(hex, sizeof hex, "U+%04X", 0x2800 + mask);
    CHECK(row.fields[2] == hex);
  }
}

TEST_CASE("codec examples") {
  CHECK(ascii_to_unicode("A") == "⠁");
  CHECK(ascii_to_unicode("") == "");
  CHECK(ascii_to_unicode("#A") == "⠼⠁");
  CHECK(unicode_to_ascii("⠁") == "A");
  CHECK(unicode_to_ascii("⠀") == " ");
  CHECK(ascii_to_unicode("~") == "⠀");
}

TEST_CASE("codec errors carry positions") {
  try {
    ascii_to_unicode("AB\xC3\xA9");
    FAIL("expected InvalidChar");
  } catch (const PositionedError& e) {
    CHECK(e.kind() == "InvalidChar");
    CHECK(e.position() == 2);
  }
  try {
    unicode_to_ascii("⠁A");
    FAIL("expected OutOfRange");
  } catch (const PositionedError& e) {
    CHECK(e.kind() == "OutOfRange");
    CHECK(e.position() == 1);
  }
}

TEST_CASE("dot mask of every unicode cell equals its index") {
  for (std::size_t mask = 0; mask < 64; ++mask) {
    const std::u32string cps = decode_utf8(ascii_to_unicode(std::string(1, kBrailleAscii[mask])));
    REQUIRE(cps.size() == 1);
    CHECK(cps[0] - 0x2800 == mask);
  }
}

TEST_CASE("codec bijection on random strings") {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const std::size_t n = rng.index(40);
    for (std::size_t k = 0; k < n; ++k) s += kBrailleAscii[rng.index(64)];
    CHECK(unicode_to_ascii(ascii_to_unicode(s)) == s);
  }
}

TEST_CASE("validate") {
  CHECK(validate("G*AGI D KYSU F9/V'").ok());
  CHECK(validate("").ok());
  const ValidationResult r = validate("abc");
  REQUIRE(r.issues.size() == 3);
  CHECK(r.issues[0] == InvalidChar{0, U'a'});
  CHECK(r.issues[2] == InvalidChar{2, U'c'});
  const ValidationResult u = validate("A\xE4\xB8\x80Z");
  REQUIRE(u.issues.size() == 1);
  CHECK(u.issues[0] == InvalidChar{1, U'一'});
}

TEST_CASE("cell and fragment types") {
  const auto cell = BrailleCell::from_ascii('G');
  REQUIRE(cell);
  CHECK(cell->dots() == 0b011011);
  CHECK(cell->raised(1));
  CHECK_FALSE(cell->raised(3));
  CHECK(BrailleCell(0).ascii() == kBlankCell);
  CHECK_FALSE(BrailleCell::from_ascii('a'));
  CHECK(BrailleCell::from_unicode(0x283F)->ascii() == '=');

  CHECK(BrailleFragment::parse("G*A").size() == 3);
  CHECK_THROWS_AS(BrailleFragment::parse(""), Error);
  CHECK_THROWS_AS(BrailleFragment::parse("G A"), Error);
}

TEST_CASE("sequence spacing rules") {
  const auto s = BrailleSequence::parse("G*AGI D KYSU");
  CHECK(s.words().size() == 3);
  CHECK(s.cell_count() == 10);
  CHECK(BrailleSequence::parse("").empty());
  for (const char* bad : {" A", "A ", "A  B"}) {
    try {
      BrailleSequence::parse(bad);
      FAIL("expected InvalidSpacing for '" << bad << "'");
    } catch (const Error& e) {
      CHECK(e.kind() == "InvalidSpacing");
    }
  }
  CHECK(BrailleSequence::from_words({"AB", "C"}).str() == "AB C");
}

TEST_CASE("perturb_dots edge rates") {
  const auto s = BrailleSequence::parse("G*AGI D KYSU F9/V'");
  CHECK(perturb_dots(s, 0.0, 3) == s);
  const auto inverted = perturb_dots(s, 1.0, 3);
  const auto a = dot_masks(s.str());
  const auto b = dot_masks(inverted.str());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (s.str()[i] == ' ') {
      CHECK(inverted.str()[i] == ' ');
    } else {
      CHECK((a[i] ^ b[i]) == 0x3f);
    }
  }
  CHECK_THROWS_AS(perturb_dots(s, 1.5, 0), Error);
  CHECK_THROWS_AS(perturb_dots(s, -0.1, 0), Error);
}

TEST_CASE("perturb_dots never emits a separator for an emptied cell") {
  // '=' is the full cell; rate 1 empties it.
  const auto out = perturb_dots(BrailleSequence::parse("== ="), 1.0, 1);
  CHECK(out.str() == "~~ ~");
  CHECK(validate(out.str()).ok());
  CHECK(BrailleSequence::parse(out.str()).words().size() == 2);
}

TEST_CASE("perturb_dots is seed-reproducible and seed-sensitive") {
  Rng rng(11);
  std::string text = testing::random_cells(rng, 300);
  const auto s = BrailleSequence::parse(text);
  CHECK(perturb_dots(s, 0.2, 99) == perturb_dots(s, 0.2, 99));
  CHECK_FALSE(perturb_dots(s, 0.2, 99) == perturb_dots(s, 0.2, 100));
}

TEST_CASE("perturbed output validates") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> words;
    for (std::size_t w = 0, n = 1 + rng.index(5); w < n; ++w) words.push_back(testing::random_cells(rng, 1 + rng.index(4)));
    const auto out = perturb_dots(BrailleSequence::from_words(words), rng.uniform(), rng.next());
    CHECK(validate(out.str()).ok());
    CHECK_NOTHROW(BrailleSequence::parse(out.str()));
  }
}
