#pragma once

// Six-dot Braille cells, the North American Braille ASCII encoding, and
// Unicode Braille Patterns (U+2800..U+283F).

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "braillekit/error.hpp"

namespace braillekit {

// Braille ASCII character for every dot mask; bit k of the index is dot k+1.
// Cross-checked against the North American Braille ASCII chart and the
// Unicode Braille Patterns block (see tables/braille_ascii.tsv).
inline constexpr std::string_view kBrailleAscii =
    " A1B'K2L@CIF/MSP\"E3H9O6R^DJG>NTQ,*5<-U8V.%[$+X!&;:4\\0Z7(_?W]#Y)=";
static_assert(kBrailleAscii.size() == 64);

// The blank cell (no dots raised) inside a word. The chart renders it as a
// space, but space is reserved for the inter-word separator, so a cell that
// loses all of its dots is written with this glyph instead.
inline constexpr char kBlankCell = '~';
inline constexpr char kWordSeparator = ' ';
inline constexpr char32_t kUnicodeBrailleBase = 0x2800;

class BrailleCell {
 public:
  constexpr BrailleCell() = default;
  constexpr explicit BrailleCell(std::uint8_t dots) : dots_(static_cast<std::uint8_t>(dots & 0x3f)) {}

  static std::optional<BrailleCell> from_ascii(char c) noexcept;
  static std::optional<BrailleCell> from_unicode(char32_t c) noexcept;

  constexpr std::uint8_t dots() const noexcept { return dots_; }
  // dot in 1..6
  constexpr bool raised(int dot) const noexcept { return (dots_ >> (dot - 1)) & 1U; }
  // Blank cells render as kBlankCell, never as the word separator.
  char ascii() const noexcept;
  char32_t unicode() const noexcept { return kUnicodeBrailleBase + dots_; }

  friend constexpr auto operator<=>(BrailleCell, BrailleCell) = default;

 private:
  std::uint8_t dots_ = 0;
};

// True for the 63 non-blank chart characters and kBlankCell.
bool is_cell_char(char c) noexcept;
// True for cell characters and the word separator.
bool is_braille_ascii(char c) noexcept;

// Dot masks of a string of cell characters; spaces map to the blank cell.
std::vector<std::uint8_t> dot_masks(std::string_view cells);

struct InvalidChar {
  std::size_t position = 0;
  char32_t character = 0;
  friend bool operator==(const InvalidChar&, const InvalidChar&) = default;
};

struct ValidationResult {
  std::vector<InvalidChar> issues;
  bool ok() const noexcept { return issues.empty(); }
};

// Reports every code point that is neither a Braille ASCII character nor a
// space. Positions are code point offsets. Never throws; malformed UTF-8 bytes
// are reported individually.
ValidationResult validate(std::string_view text);

// Braille ASCII to UTF-8 Unicode Braille. Throws PositionedError("InvalidChar").
std::string ascii_to_unicode(std::string_view ascii);
// UTF-8 Unicode Braille to Braille ASCII; U+2800 maps to a space. Throws
// PositionedError("OutOfRange") with a code point offset.
std::string unicode_to_ascii(std::string_view unicode);

// A non-empty run of cells acting as one lexical unit. Contains no space.
class BrailleFragment {
 public:
  // Throws Error("InvalidFragment").
  static BrailleFragment parse(std::string_view text);

  const std::string& str() const noexcept { return chars_; }
  std::size_t size() const noexcept { return chars_.size(); }
  std::vector<BrailleCell> cells() const;

  friend auto operator<=>(const BrailleFragment&, const BrailleFragment&) = default;

 private:
  explicit BrailleFragment(std::string chars) : chars_(std::move(chars)) {}
  std::string chars_;
};

// Words of cells separated by single spaces, with no leading or trailing
// space. The empty sequence is valid.
class BrailleSequence {
 public:
  BrailleSequence() = default;

  // Throws PositionedError("InvalidChar") or Error("InvalidSpacing").
  static BrailleSequence parse(std::string_view text);
  static BrailleSequence from_words(const std::vector<std::string>& words);

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }
  std::vector<std::string_view> words() const;
  std::size_t cell_count() const noexcept;

  friend bool operator==(const BrailleSequence&, const BrailleSequence&) = default;

 private:
  explicit BrailleSequence(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

// Flips each dot of each cell independently with probability `rate`. The draw
// for a dot is keyed by (seed, cell index, dot index), so the result is
// reproducible and independent of traversal order. Word separators are never
// touched. Throws Error("InvalidRate") unless 0 <= rate <= 1.
BrailleSequence perturb_dots(const BrailleSequence& sequence, double rate, std::uint64_t seed);

}  // namespace braillekit
