#include "braillekit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <unordered_set>

#include "json.hpp"

#include "braillekit/braille.hpp"
#include "braillekit/error.hpp"
#include "braillekit/text_util.hpp"

namespace braillekit {

std::string_view to_string(IssueKind kind) noexcept {
  switch (kind) {
    case IssueKind::InvalidBrailleAscii: return "InvalidBrailleAscii";
    case IssueKind::MalformedBrailleSpacing: return "MalformedBrailleSpacing";
    case IssueKind::MalformedLatex: return "MalformedLatex";
    case IssueKind::AlignmentOutOfBounds: return "AlignmentOutOfBounds";
    case IssueKind::AlignmentOverlap: return "AlignmentOverlap";
    case IssueKind::AlignmentNotMonotone: return "AlignmentNotMonotone";
    case IssueKind::AlignmentGap: return "AlignmentGap";
    case IssueKind::EmptyText: return "EmptyText";
    case IssueKind::EmptyBraille: return "EmptyBraille";
  }
  return "Unknown";
}

// Math spans ----------------------------------------------------------------

namespace {

struct MathSpan {
  std::size_t open = 0;   // byte offset of the opening delimiter
  std::size_t close = 0;  // byte offset of the closing delimiter
  std::size_t delimiter = 1;
};

// Finds `$...$` and `$$...$$` spans; escaped `\$` is literal. Returns nullopt
// when a delimiter is left open.
std::optional<std::vector<MathSpan>> find_math_spans(std::string_view text) {
  std::vector<MathSpan> spans;
  std::size_t i = 0;
  std::optional<MathSpan> open;
  while (i < text.size()) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      i += 2;
      continue;
    }
    if (text[i] != '$') {
      ++i;
      continue;
    }
    const std::size_t width = (i + 1 < text.size() && text[i + 1] == '$') ? 2 : 1;
    if (!open) {
      open = MathSpan{i, 0, width};
    } else if (open->delimiter == width) {
      open->close = i;
      spans.push_back(*open);
      open.reset();
    } else {
      return std::nullopt;
    }
    i += width;
  }
  if (open) return std::nullopt;
  return spans;
}

// A parsed math token list: plain tokens and brace groups.
struct MathNode {
  std::string token;  // empty for groups
  std::vector<MathNode> children;
  bool group = false;
  bool space = false;
};

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Parses until the matching '}' (or the end at top level). Returns false on
// unbalanced braces.
bool parse_math(std::string_view text, std::size_t& i, std::vector<MathNode>& out, bool nested) {
  while (i < text.size()) {
    const char c = text[i];
    if (c == '}') {
      if (!nested) return false;
      ++i;
      return true;
    }
    if (c == '{') {
      ++i;
      MathNode group;
      group.group = true;
      if (!parse_math(text, i, group.children, true)) return false;
      out.push_back(std::move(group));
      continue;
    }
    MathNode node;
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r')) ++i;
      node.space = true;
    } else if (c == '\\' && i + 1 < text.size() && is_letter(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && is_letter(text[j])) ++j;
      node.token = std::string(text.substr(i, j - i));
      i = j;
    } else if (c == '\\' && i + 1 < text.size()) {
      node.token = std::string(text.substr(i, 2));
      i += 2;
    } else {
      // one UTF-8 code point
      std::size_t j = i + 1;
      while (j < text.size() && (static_cast<unsigned char>(text[j]) & 0xc0) == 0x80) ++j;
      node.token = std::string(text.substr(i, j - i));
      i = j;
    }
    out.push_back(std::move(node));
  }
  return !nested;
}

bool is_fraction_command(const std::string& token) {
  return token == "\\frac" || token == "\\dfrac" || token == "\\tfrac";
}

std::vector<MathNode> canonical(std::vector<MathNode> nodes);

MathNode canonical_group(MathNode group) {
  group.children = canonical(std::move(group.children));
  // {{x}} -> {x}
  while (group.children.size() == 1 && group.children.front().group) {
    MathNode inner = std::move(group.children.front());
    group.children = std::move(inner.children);
  }
  return group;
}

std::vector<MathNode> canonical(std::vector<MathNode> nodes) {
  std::vector<MathNode> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    MathNode& node = nodes[i];
    if (node.group) {
      out.push_back(canonical_group(std::move(node)));
      continue;
    }
    if (!node.space && is_fraction_command(node.token)) {
      MathNode command;
      command.token = "\\frac";
      out.push_back(std::move(command));
      std::size_t taken = 0;
      std::size_t j = i + 1;
      while (taken < 2 && j < nodes.size()) {
        if (nodes[j].space) {
          ++j;
          continue;
        }
        MathNode argument;
        if (nodes[j].group) {
          argument = canonical_group(std::move(nodes[j]));
        } else {
          argument.group = true;
          argument.children.push_back(std::move(nodes[j]));
        }
        out.push_back(std::move(argument));
        ++taken;
        ++j;
      }
      i = j - 1;
      continue;
    }
    out.push_back(std::move(node));
  }
  return out;
}

void serialize(const std::vector<MathNode>& nodes, std::string& out) {
  const MathNode* previous = nullptr;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const MathNode& node = nodes[i];
    if (node.space) {
      // A blank is only meaningful between a control word and a letter.
      const MathNode* next = i + 1 < nodes.size() ? &nodes[i + 1] : nullptr;
      if (previous != nullptr && !previous->group && previous->token.size() > 1 && previous->token[0] == '\\' &&
          is_letter(previous->token[1]) && next != nullptr && !next->group && !next->space &&
          !next->token.empty() && is_letter(next->token[0])) {
        out.push_back(' ');
      }
      continue;
    }
    if (node.group) {
      out.push_back('{');
      serialize(node.children, out);
      out.push_back('}');
    } else {
      out += node.token;
    }
    previous = &node;
  }
}

std::string canonical_math(std::string_view body) {
  // "frac{" without its backslash is a common transcription slip.
  static const std::regex kBareFrac(R"((^|[^\\A-Za-z])frac(\s*\{))");
  const std::string repaired = std::regex_replace(std::string(body), kBareFrac, "$1\\frac$2");
  std::vector<MathNode> nodes;
  std::size_t i = 0;
  if (!parse_math(repaired, i, nodes, false)) {
    return std::string(trim(repaired));  // left for validation to report
  }
  std::string out;
  serialize(canonical(std::move(nodes)), out);
  return out;
}

bool is_control(char32_t c) { return (c < 0x20 && c != '\t' && c != '\n') || (c >= 0x7f && c <= 0x9f); }

}  // namespace

std::string normalize(std::string_view raw) {
  std::string composed = nfc(raw);
  std::u32string code_points = decode_utf8(composed);
  std::erase_if(code_points, is_control);
  const std::string text = encode_utf8(code_points);

  const auto spans = find_math_spans(text);
  if (!spans) throw Error("UnbalancedMathDelimiters", "unmatched '$' in: " + text);
  std::string out;
  std::size_t at = 0;
  for (const MathSpan& span : *spans) {
    out += text.substr(at, span.open - at);
    const std::string delimiter(span.delimiter, '$');
    out += delimiter;
    const std::string body = canonical_math(std::string_view(text).substr(span.open + span.delimiter,
                                                                         span.close - span.open - span.delimiter));
    // A blank span keeps one space so "$ $" does not turn into "$$".
    out += body.empty() ? " " : body;
    out += delimiter;
    at = span.close + span.delimiter;
  }
  out += text.substr(at);
  return out;
}

std::vector<std::string> latex_problems(std::string_view text) {
  std::vector<std::string> problems;
  const auto spans = find_math_spans(text);
  if (!spans) {
    problems.push_back("unbalanced math delimiters");
    return problems;
  }
  std::size_t at = 0;
  static const std::regex kCommand(R"(\\[A-Za-z]+)");
  for (const MathSpan& span : *spans) {
    const std::string prose(text.substr(at, span.open - at));
    if (std::regex_search(prose, kCommand)) problems.push_back("LaTeX command outside math delimiters");
    const std::string_view body = text.substr(span.open + span.delimiter, span.close - span.open - span.delimiter);
    if (trim(body).empty()) problems.push_back("empty math span");
    std::vector<MathNode> nodes;
    std::size_t i = 0;
    if (!parse_math(body, i, nodes, false)) {
      problems.push_back("unbalanced braces in math span");
    } else {
      // \frac needs two arguments
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k].group || !is_fraction_command(nodes[k].token)) continue;
        std::size_t arguments = 0;
        for (std::size_t j = k + 1; j < nodes.size() && arguments < 2; ++j) {
          if (!nodes[j].space) ++arguments;
        }
        if (arguments < 2) problems.push_back("\\frac with fewer than two arguments");
      }
    }
    at = span.close + span.delimiter;
  }
  if (std::regex_search(std::string(text.substr(at)), kCommand)) {
    problems.push_back("LaTeX command outside math delimiters");
  }
  return problems;
}

std::vector<Issue> validate_example(const ParallelExample& example) {
  std::vector<Issue> issues;
  if (example.text.empty()) issues.push_back({IssueKind::EmptyText, "text side is empty"});
  if (example.braille.empty()) issues.push_back({IssueKind::EmptyBraille, "Braille side is empty"});

  for (const InvalidChar& bad : validate(example.braille).issues) {
    issues.push_back({IssueKind::InvalidBrailleAscii,
                      "code point U+" + std::to_string(static_cast<std::uint32_t>(bad.character)) +
                          " at position " + std::to_string(bad.position)});
  }
  const std::string& braille = example.braille;
  for (std::size_t i = 0; i < braille.size(); ++i) {
    if (braille[i] == kWordSeparator &&
        (i == 0 || i + 1 == braille.size() || braille[i + 1] == kWordSeparator)) {
      issues.push_back({IssueKind::MalformedBrailleSpacing, "stray space at position " + std::to_string(i)});
    }
  }

  std::u32string text;
  try {
    text = decode_utf8(example.text);
  } catch (const Error& e) {
    issues.push_back({IssueKind::MalformedLatex, e.what()});
    return issues;
  }
  for (std::string& problem : latex_problems(example.text)) {
    issues.push_back({IssueKind::MalformedLatex, std::move(problem)});
  }

  if (example.alignment.empty()) return issues;

  bool in_bounds = true;
  for (std::size_t i = 0; i < example.alignment.size(); ++i) {
    const AlignmentPair& pair = example.alignment[i];
    if (pair.text_start >= pair.text_end || pair.text_end > text.size() || pair.braille_start >= pair.braille_end ||
        pair.braille_end > braille.size()) {
      issues.push_back({IssueKind::AlignmentOutOfBounds, "pair " + std::to_string(i) + " is empty or out of bounds"});
      in_bounds = false;
    }
  }
  if (!in_bounds) return issues;

  for (std::size_t i = 1; i < example.alignment.size(); ++i) {
    const AlignmentPair& a = example.alignment[i - 1];
    const AlignmentPair& b = example.alignment[i];
    if (b.text_start < a.text_start || b.braille_start < a.braille_start) {
      issues.push_back({IssueKind::AlignmentNotMonotone, "pair " + std::to_string(i) + " moves backwards"});
    }
  }

  // Coverage counts per unit find both overlaps and gaps.
  std::vector<int> text_cover(text.size(), 0);
  std::vector<int> braille_cover(braille.size(), 0);
  for (const AlignmentPair& pair : example.alignment) {
    for (std::size_t k = pair.text_start; k < pair.text_end; ++k) ++text_cover[k];
    for (std::size_t k = pair.braille_start; k < pair.braille_end; ++k) ++braille_cover[k];
  }
  const bool text_overlap = std::any_of(text_cover.begin(), text_cover.end(), [](int c) { return c > 1; });
  const bool braille_overlap = std::any_of(braille_cover.begin(), braille_cover.end(), [](int c) { return c > 1; });
  if (text_overlap || braille_overlap) {
    issues.push_back({IssueKind::AlignmentOverlap, text_overlap ? "text spans overlap" : "Braille spans overlap"});
  }
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (text_cover[k] == 0 && !is_unicode_space(text[k])) {
      issues.push_back({IssueKind::AlignmentGap, "text position " + std::to_string(k) + " is unaligned"});
      break;
    }
  }
  for (std::size_t k = 0; k < braille.size(); ++k) {
    if (braille_cover[k] == 0 && braille[k] != kWordSeparator) {
      issues.push_back({IssueKind::AlignmentGap, "Braille position " + std::to_string(k) + " is unaligned"});
      break;
    }
  }
  return issues;
}

std::vector<ParallelExample> dedup(const std::vector<ParallelExample>& corpus) {
  std::vector<ParallelExample> out;
  std::unordered_set<std::string> seen;
  for (const ParallelExample& example : corpus) {
    std::string key;
    try {
      key = normalize(example.text);
    } catch (const Error&) {
      key = example.text;
    }
    if (seen.insert(std::move(key)).second) out.push_back(example);
  }
  return out;
}

// Instructions ---------------------------------------------------------------

Direction parse_direction(std::string_view name) {
  if (name == "braille-to-text" || name == "b2t") return Direction::BrailleToText;
  if (name == "text-to-braille" || name == "t2b") return Direction::TextToBraille;
  throw Error("InvalidDirection", "unknown direction '" + std::string(name) + "'");
}

std::string_view to_string(Direction direction) noexcept {
  return direction == Direction::BrailleToText ? "braille-to-text" : "text-to-braille";
}

std::vector<InstructionTemplate> load_templates(const std::filesystem::path& path) {
  std::vector<InstructionTemplate> templates;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    templates.push_back({path.stem().string() + ":" + std::to_string(i + 1), std::string(line)});
  }
  return templates;
}

std::string default_task(const ParallelExample& example, Direction direction) {
  const std::string language = example.language == Language::Chinese ? "chinese" : "english";
  if (!example.task.empty()) {
    constexpr std::string_view kSuffix = "_to_braille";
    if (direction == Direction::BrailleToText && example.task.ends_with(kSuffix)) {
      return "braille_to_" + example.task.substr(0, example.task.size() - kSuffix.size());
    }
    return example.task;
  }
  return direction == Direction::BrailleToText ? "braille_to_" + language : language + "_to_braille";
}

InstructionRecord render_instruction(const InstructionTemplate& instruction, const ParallelExample& example,
                                     Direction direction) {
  InstructionRecord record;
  record.template_id = instruction.id;
  record.task = default_task(example, direction);
  record.input = direction == Direction::BrailleToText ? example.braille : example.text;
  record.expected_output = direction == Direction::BrailleToText ? example.text : example.braille;
  const std::string language = example.language == Language::Chinese ? "Chinese" : "English";

  static const std::regex kPlaceholder(R"(\{([A-Za-z_]+)\})");
  std::string rendered;
  bool has_input = false;
  std::size_t at = 0;
  const std::string& text = instruction.text;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kPlaceholder); it != std::sregex_iterator(); ++it) {
    const auto& match = *it;
    rendered += text.substr(at, static_cast<std::size_t>(match.position()) - at);
    const std::string name = match[1].str();
    if (name == "input") {
      rendered += record.input;
      has_input = true;
    } else if (name == "language") {
      rendered += language;
    } else if (name == "task") {
      std::string task = record.task;
      std::replace(task.begin(), task.end(), '_', ' ');
      rendered += task;
    } else {
      throw Error("UnknownPlaceholder", "template " + instruction.id + " uses unknown placeholder {" + name + "}");
    }
    at = static_cast<std::size_t>(match.position() + match.length());
  }
  rendered += text.substr(at);
  if (!has_input) throw Error("UnknownPlaceholder", "template " + instruction.id + " has no {input} placeholder");

  std::size_t count = 0;
  if (!record.input.empty()) {
    for (std::size_t pos = rendered.find(record.input); pos != std::string::npos;
         pos = rendered.find(record.input, pos + 1)) {
      ++count;
    }
  }
  if (count != 1) {
    throw Error("InputNotVerbatim", "rendered instruction from " + instruction.id + " contains the input " +
                                        std::to_string(count) + " times");
  }
  record.instruction = std::move(rendered);
  return record;
}

// JSONL ------------------------------------------------------------------------

ParallelExample example_from_json(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("ParseError", e.what());
  }
  try {
    ParallelExample example;
    example.id = j.value("id", std::string());
    example.language = parse_language(j.value("language", std::string("zh")));
    example.text = j.at("text").get<std::string>();
    example.braille = j.at("braille").get<std::string>();
    example.task = j.value("task", std::string());
    if (j.contains("pinyin")) example.pinyin = j.at("pinyin").get<std::vector<std::string>>();
    if (j.contains("alignment")) {
      for (const auto& pair : j.at("alignment")) {
        const auto v = pair.get<std::vector<std::size_t>>();
        if (v.size() != 4) throw Error("ParseError", "alignment entries need 4 offsets");
        example.alignment.push_back({v[0], v[1], v[2], v[3]});
      }
    }
    return example;
  } catch (const nlohmann::json::exception& e) {
    throw Error("ParseError", e.what());
  }
}

std::string example_to_json(const ParallelExample& example) {
  nlohmann::json j = {{"id", example.id},
                      {"language", std::string(to_string(example.language))},
                      {"text", example.text},
                      {"braille", example.braille}};
  nlohmann::json alignment = nlohmann::json::array();
  for (const AlignmentPair& pair : example.alignment) {
    alignment.push_back({pair.text_start, pair.text_end, pair.braille_start, pair.braille_end});
  }
  j["alignment"] = std::move(alignment);
  if (!example.task.empty()) j["task"] = example.task;
  if (!example.pinyin.empty()) j["pinyin"] = example.pinyin;
  return j.dump();
}

std::string record_to_json(const InstructionRecord& record) {
  return nlohmann::json{{"template_id", record.template_id},
                        {"instruction", record.instruction},
                        {"input", record.input},
                        {"output", record.expected_output},
                        {"task", record.task}}
      .dump();
}

std::vector<ParallelExample> read_corpus(const std::filesystem::path& path) {
  std::vector<ParallelExample> corpus;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      corpus.push_back(example_from_json(lines[i]));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& path, const std::vector<ParallelExample>& corpus) {
  std::ofstream out(path);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  for (const ParallelExample& example : corpus) out << example_to_json(example) << "\n";
}

}  // namespace braillekit
