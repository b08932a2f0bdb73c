#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace braillekit {

// Decodes UTF-8 into Unicode scalar values. Throws Error("InvalidUtf8") on
// malformed input.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view code_points);
void append_utf8(std::string& out, char32_t code_point);

// Canonical composition (NFC).
std::string nfc(std::string_view text);

bool is_han(char32_t c) noexcept;
bool is_unicode_space(char32_t c) noexcept;
// General categories P* and S*.
bool is_unicode_punct(char32_t c) noexcept;
bool is_unicode_symbol(char32_t c) noexcept;
bool is_unicode_digit(char32_t c) noexcept;

std::vector<std::string_view> split(std::string_view text, char delimiter);
std::vector<std::string_view> split_whitespace(std::string_view text);
std::string_view trim(std::string_view text) noexcept;
std::string join(const std::vector<std::string>& parts, std::string_view separator);
std::string to_lower_ascii(std::string_view text);

// One data row of a TSV table: the 1-based source line and its fields.
struct TsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Reads tab-separated rows, skipping blank lines and lines whose first
// non-blank character is '#'. Trailing CR is stripped.
std::vector<TsvRow> read_tsv(std::istream& in);
std::vector<TsvRow> read_tsv_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace braillekit
