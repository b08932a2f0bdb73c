#include "braillekit/braille.hpp"

#include "braillekit/rng.hpp"
#include "braillekit/text_util.hpp"

namespace braillekit {
namespace {

constexpr std::array<std::int8_t, 128> make_mask_table() {
  std::array<std::int8_t, 128> table{};
  for (auto& entry : table) entry = -1;
  for (std::size_t mask = 0; mask < kBrailleAscii.size(); ++mask) {
    table[static_cast<unsigned char>(kBrailleAscii[mask])] = static_cast<std::int8_t>(mask);
  }
  table[static_cast<unsigned char>(kBlankCell)] = 0;
  return table;
}

constexpr auto kMaskOf = make_mask_table();

int mask_of(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return u < kMaskOf.size() ? kMaskOf[u] : -1;
}

}  // namespace

std::optional<BrailleCell> BrailleCell::from_ascii(char c) noexcept {
  const int mask = mask_of(c);
  if (mask < 0) return std::nullopt;
  return BrailleCell(static_cast<std::uint8_t>(mask));
}

std::optional<BrailleCell> BrailleCell::from_unicode(char32_t c) noexcept {
  if (c < kUnicodeBrailleBase || c > kUnicodeBrailleBase + 0x3f) return std::nullopt;
  return BrailleCell(static_cast<std::uint8_t>(c - kUnicodeBrailleBase));
}

char BrailleCell::ascii() const noexcept { return dots_ == 0 ? kBlankCell : kBrailleAscii[dots_]; }

bool is_cell_char(char c) noexcept { return c != kWordSeparator && mask_of(c) >= 0; }

bool is_braille_ascii(char c) noexcept { return mask_of(c) >= 0; }

std::vector<std::uint8_t> dot_masks(std::string_view cells) {
  std::vector<std::uint8_t> masks;
  masks.reserve(cells.size());
  for (char c : cells) {
    const int mask = mask_of(c);
    masks.push_back(static_cast<std::uint8_t>(mask < 0 ? 0 : mask));
  }
  return masks;
}

ValidationResult validate(std::string_view text) {
  ValidationResult result;
  std::size_t position = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto byte = static_cast<unsigned char>(text[i]);
    if (byte < 0x80) {
      if (!is_braille_ascii(text[i])) result.issues.push_back({position, byte});
      ++i;
    } else {
      // Any non-ASCII code point is invalid; decode it to report it whole.
      std::size_t length = 1;
      if ((byte & 0xe0) == 0xc0) length = 2;
      else if ((byte & 0xf0) == 0xe0) length = 3;
      else if ((byte & 0xf8) == 0xf0) length = 4;
      char32_t cp = byte;
      try {
        const auto decoded = decode_utf8(text.substr(i, length));
        if (decoded.size() == 1) cp = decoded.front();
        else length = 1;
      } catch (const Error&) {
        length = 1;
      }
      result.issues.push_back({position, cp});
      i += length;
    }
    ++position;
  }
  return result;
}

std::string ascii_to_unicode(std::string_view ascii) {
  std::string out;
  out.reserve(ascii.size() * 3);
  for (std::size_t i = 0; i < ascii.size(); ++i) {
    const int mask = mask_of(ascii[i]);
    if (mask < 0) {
      throw PositionedError("InvalidChar", i,
                            "invalid Braille ASCII character '" + std::string(1, ascii[i]) +
                                "' at position " + std::to_string(i));
    }
    append_utf8(out, kUnicodeBrailleBase + static_cast<char32_t>(mask));
  }
  return out;
}

std::string unicode_to_ascii(std::string_view unicode) {
  std::u32string code_points;
  try {
    code_points = decode_utf8(unicode);
  } catch (const PositionedError& e) {
    throw PositionedError("OutOfRange", e.position(), "malformed UTF-8 in Unicode Braille input");
  }
  std::string out;
  out.reserve(code_points.size());
  for (std::size_t i = 0; i < code_points.size(); ++i) {
    const auto cell = BrailleCell::from_unicode(code_points[i]);
    if (!cell) {
      throw PositionedError("OutOfRange", i,
                            "code point outside U+2800..U+283F at position " + std::to_string(i));
    }
    out.push_back(kBrailleAscii[cell->dots()]);
  }
  return out;
}

BrailleFragment BrailleFragment::parse(std::string_view text) {
  if (text.empty()) throw Error("InvalidFragment", "empty Braille fragment");
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_cell_char(text[i])) {
      throw Error("InvalidFragment", "fragment '" + std::string(text) + "' has invalid character at " +
                                         std::to_string(i));
    }
  }
  return BrailleFragment(std::string(text));
}

std::vector<BrailleCell> BrailleFragment::cells() const {
  std::vector<BrailleCell> out;
  out.reserve(chars_.size());
  for (char c : chars_) out.push_back(*BrailleCell::from_ascii(c));
  return out;
}

BrailleSequence BrailleSequence::parse(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_braille_ascii(text[i])) {
      throw PositionedError("InvalidChar", i,
                            "invalid Braille ASCII character at position " + std::to_string(i));
    }
    if (text[i] == kWordSeparator &&
        (i == 0 || i + 1 == text.size() || text[i + 1] == kWordSeparator)) {
      throw Error("InvalidSpacing", "leading, trailing or doubled space at position " + std::to_string(i));
    }
  }
  return BrailleSequence(std::string(text));
}

BrailleSequence BrailleSequence::from_words(const std::vector<std::string>& words) {
  std::string text;
  for (const auto& word : words) {
    if (word.empty()) continue;
    if (!text.empty()) text.push_back(kWordSeparator);
    text += word;
  }
  return parse(text);
}

std::vector<std::string_view> BrailleSequence::words() const {
  if (text_.empty()) return {};
  return split(text_, kWordSeparator);
}

std::size_t BrailleSequence::cell_count() const noexcept {
  std::size_t n = 0;
  for (char c : text_) n += c != kWordSeparator;
  return n;
}

BrailleSequence perturb_dots(const BrailleSequence& sequence, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw Error("InvalidRate", "dot flip rate must lie in [0, 1]");
  }
  std::string out = sequence.str();
  std::uint64_t cell_index = 0;
  for (char& c : out) {
    if (c == kWordSeparator) continue;
    auto dots = static_cast<std::uint8_t>(mask_of(c));
    for (std::uint64_t dot = 0; dot < 6; ++dot) {
      if (unit_interval(counter_bits(seed, cell_index, dot)) < rate) {
        dots ^= static_cast<std::uint8_t>(1U << dot);
      }
    }
    c = BrailleCell(dots).ascii();
    ++cell_index;
  }
  return BrailleSequence::parse(out);
}

}  // namespace braillekit
