#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "braillekit/knowledge_base.hpp"

namespace braillekit {

// Half-open spans: code points into the text, bytes into the Braille side.
struct AlignmentPair {
  std::size_t text_start = 0;
  std::size_t text_end = 0;
  std::size_t braille_start = 0;
  std::size_t braille_end = 0;
  friend bool operator==(const AlignmentPair&, const AlignmentPair&) = default;
};

struct ParallelExample {
  std::string id;
  Language language = Language::Chinese;
  std::string text;
  std::string braille;
  // Empty for unaligned examples. When present it must cover every
  // non-whitespace unit of both sides.
  std::vector<AlignmentPair> alignment;
  std::string task;                 // optional task tag
  std::vector<std::string> pinyin;  // optional per-word Pinyin, e.g. {"gu4", "da2an4"}

  friend bool operator==(const ParallelExample&, const ParallelExample&) = default;
};

enum class IssueKind {
  InvalidBrailleAscii,
  MalformedBrailleSpacing,
  MalformedLatex,
  AlignmentOutOfBounds,
  AlignmentOverlap,
  AlignmentNotMonotone,
  AlignmentGap,
  EmptyText,
  EmptyBraille,
};

std::string_view to_string(IssueKind kind) noexcept;

struct Issue {
  IssueKind kind;
  std::string detail;
};

// Automated format checks: Braille ASCII validity and spacing, LaTeX
// well-formedness inside `$...$`, alignment bounds, overlap, order and gaps,
// and empty sides.
std::vector<Issue> validate_example(const ParallelExample& example);

// LaTeX-level checks for one piece of text; empty when well formed.
std::vector<std::string> latex_problems(std::string_view text);

// NFC, control characters removed, and every `$...$` span rewritten in
// canonical form: no padding inside the delimiters, no blanks between a
// command and its arguments, `\frac{a}{b}` for every fraction spelling and no
// doubled braces. Throws Error("UnbalancedMathDelimiters").
std::string normalize(std::string_view raw);

// Drops examples whose normalised text was already seen; order is stable.
std::vector<ParallelExample> dedup(const std::vector<ParallelExample>& corpus);

// Instruction rendering ----------------------------------------------------

enum class Direction { BrailleToText, TextToBraille };

Direction parse_direction(std::string_view name);
std::string_view to_string(Direction direction) noexcept;

struct InstructionTemplate {
  std::string id;
  std::string text;  // placeholders: {input}, {language}, {task}
};

struct InstructionRecord {
  std::string template_id;
  std::string instruction;
  std::string input;
  std::string expected_output;
  std::string task;
};

// One template per non-empty, non-comment line; ids are `<file stem>:<line>`.
std::vector<InstructionTemplate> load_templates(const std::filesystem::path& path);

// Throws Error("UnknownPlaceholder") for placeholders outside the allowed set
// or a template without {input}, and Error("InputNotVerbatim") when the
// rendered instruction would not contain the input exactly once.
InstructionRecord render_instruction(const InstructionTemplate& instruction, const ParallelExample& example,
                                     Direction direction);

// Task tag used when the example carries none.
std::string default_task(const ParallelExample& example, Direction direction);

// JSONL --------------------------------------------------------------------

ParallelExample example_from_json(std::string_view line);
std::string example_to_json(const ParallelExample& example);
std::string record_to_json(const InstructionRecord& record);
std::vector<ParallelExample> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const std::vector<ParallelExample>& corpus);

}  // namespace braillekit
