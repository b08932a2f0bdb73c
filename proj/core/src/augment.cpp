#include "braillekit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "braillekit/error.hpp"
#include "braillekit/rng.hpp"
#include "braillekit/text_util.hpp"
#include "json.hpp"

namespace braillekit {

namespace {

std::string_view text_separator(Language language) { return language == Language::Chinese ? "" : " "; }

std::size_t code_point_count(std::string_view text) { return decode_utf8(text).size(); }

}  // namespace

AnnotatedExample make_annotated(ParallelExample base, std::vector<LabeledSpan> spans) {
  if (spans.empty()) throw Error("InvalidAnnotation", "an annotation needs at least one span");
  const std::string_view separator = text_separator(base.language);
  std::string braille;
  std::string text;
  std::vector<AlignmentPair> alignment;
  std::size_t word = 0;
  std::size_t text_offset = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    LabeledSpan& span = spans[i];
    BrailleSequence sequence;
    try {
      sequence = BrailleSequence::parse(span.braille);
    } catch (const Error& e) {
      throw Error("InvalidAnnotation", "span " + std::to_string(i) + ": " + e.what());
    }
    if (sequence.empty()) throw Error("InvalidAnnotation", "span " + std::to_string(i) + " has no Braille");
    if (span.text.empty()) throw Error("InvalidAnnotation", "span " + std::to_string(i) + " has no text");
    if (i > 0) {
      braille += ' ';
      text += separator;
      text_offset += code_point_count(separator);
    }
    AlignmentPair pair;
    pair.braille_start = braille.size();
    pair.text_start = text_offset;
    braille += sequence.str();
    text += span.text;
    text_offset += code_point_count(span.text);
    pair.braille_end = braille.size();
    pair.text_end = text_offset;
    alignment.push_back(pair);
    span.start = word;
    word += sequence.words().size();
    span.end = word;
  }
  base.braille = std::move(braille);
  base.text = std::move(text);
  base.alignment = std::move(alignment);
  return {std::move(base), std::move(spans)};
}

std::vector<std::string> annotation_problems(const AnnotatedExample& annotated) {
  std::vector<std::string> problems;
  AnnotatedExample rebuilt;
  try {
    rebuilt = make_annotated(annotated.example, annotated.spans);
  } catch (const Error& e) {
    problems.emplace_back(e.what());
    return problems;
  }
  if (rebuilt.example.braille != annotated.example.braille) problems.emplace_back("Braille differs from the spans");
  if (rebuilt.example.text != annotated.example.text) problems.emplace_back("text differs from the spans");
  if (rebuilt.example.alignment != annotated.example.alignment) problems.emplace_back("alignment differs from the spans");
  for (std::size_t i = 0; i < annotated.spans.size(); ++i) {
    if (annotated.spans[i].start != rebuilt.spans[i].start || annotated.spans[i].end != rebuilt.spans[i].end) {
      problems.push_back("span " + std::to_string(i) + " has wrong word indices");
    }
  }
  return problems;
}

AnnotatedExample tag_spans(const ParallelExample& example, const KnowledgeBase& attribute_kb) {
  if (example.alignment.empty()) throw Error("InvalidAnnotation", "tagging needs an aligned example");
  const std::u32string text = decode_utf8(example.text);
  std::vector<std::pair<std::size_t, std::size_t>> words;
  for (std::size_t i = 0; i < example.braille.size();) {
    const std::size_t end = std::min(example.braille.find(' ', i), example.braille.size());
    words.emplace_back(i, end);
    i = end + 1;
  }
  std::vector<std::size_t> cuts;
  for (const auto& [start, end] : words) {
    std::size_t first = text.size();
    for (const AlignmentPair& pair : example.alignment) {
      if (pair.braille_start >= start && pair.braille_end <= end) first = std::min(first, pair.text_start);
    }
    if (first == text.size()) throw Error("InvalidAnnotation", "a Braille word has no aligned text");
    cuts.push_back(cuts.empty() ? 0 : first);
  }
  cuts.push_back(text.size());

  std::vector<LabeledSpan> spans;
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (cuts[w + 1] < cuts[w]) throw Error("InvalidAnnotation", "alignment is not monotone");
    LabeledSpan span;
    span.braille = example.braille.substr(words[w].first, words[w].second - words[w].first);
    span.text = encode_utf8(std::u32string_view(text).substr(cuts[w], cuts[w + 1] - cuts[w]));
    if (example.language == Language::English) span.text = std::string(trim(span.text));
    for (const AttributeEntry& entry : attribute_kb.attribute_entries()) {
      if (entry.fragment.str() == span.braille) {
        span.attribute = entry.attribute;
        break;
      }
    }
    spans.push_back(std::move(span));
  }
  AnnotatedExample tagged = make_annotated(example, std::move(spans));
  if (tagged.example.text != example.text) {
    throw Error("InvalidAnnotation", "text cannot be rebuilt from word-level pieces");
  }
  return tagged;
}

namespace {

void flatten_tree(const nlohmann::json& node, std::vector<LabeledSpan>& spans) {
  if (!node.is_object()) throw Error("ParseError", "tree nodes must be objects");
  const std::string label = node.value("label", std::string());
  if (node.contains("braille")) {
    LabeledSpan span;
    span.attribute = label;
    span.braille = node.at("braille").get<std::string>();
    span.text = node.value("text", std::string());
    spans.push_back(std::move(span));
    return;
  }
  if (!node.contains("children") || !node.at("children").is_array() || node.at("children").empty()) {
    throw Error("ParseError", "inner tree node '" + label + "' has no children");
  }
  for (const auto& child : node.at("children")) flatten_tree(child, spans);
}

}  // namespace

AnnotatedExample annotated_from_json(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("ParseError", e.what());
  }
  try {
    ParallelExample base;
    base.id = j.value("id", std::string());
    base.language = parse_language(j.value("language", std::string("zh")));
    base.task = j.value("task", std::string());
    if (j.contains("pinyin")) base.pinyin = j.at("pinyin").get<std::vector<std::string>>();

    std::vector<LabeledSpan> spans;
    if (j.contains("tree")) {
      flatten_tree(j.at("tree"), spans);
    } else if (j.contains("spans")) {
      const std::string braille = j.at("braille").get<std::string>();
      const std::vector<std::string_view> words = split(braille, ' ');
      std::size_t expected = 0;
      for (const auto& item : j.at("spans")) {
        LabeledSpan span;
        span.start = item.at("start").get<std::size_t>();
        span.end = item.at("end").get<std::size_t>();
        span.attribute = item.value("attribute", std::string());
        span.text = item.at("text").get<std::string>();
        if (span.start != expected || span.end <= span.start || span.end > words.size()) {
          throw Error("InvalidAnnotation", "spans must tile the Braille words in order");
        }
        std::vector<std::string> covered(words.begin() + static_cast<std::ptrdiff_t>(span.start),
                                         words.begin() + static_cast<std::ptrdiff_t>(span.end));
        span.braille = join(covered, " ");
        expected = span.end;
        spans.push_back(std::move(span));
      }
      if (expected != words.size()) throw Error("InvalidAnnotation", "spans leave Braille words uncovered");
    } else {
      throw Error("ParseError", "annotated examples need \"spans\" or \"tree\"");
    }

    AnnotatedExample annotated = make_annotated(std::move(base), std::move(spans));
    if (j.contains("braille") && j.at("braille").get<std::string>() != annotated.example.braille) {
      throw Error("InvalidAnnotation", "Braille does not match the annotation");
    }
    if (j.contains("text") && j.at("text").get<std::string>() != annotated.example.text) {
      throw Error("InvalidAnnotation", "text does not match the annotation");
    }
    return annotated;
  } catch (const nlohmann::json::exception& e) {
    throw Error("ParseError", e.what());
  }
}

std::string annotated_to_json(const AnnotatedExample& annotated) {
  nlohmann::json j = nlohmann::json::parse(example_to_json(annotated.example));
  nlohmann::json spans = nlohmann::json::array();
  for (const LabeledSpan& span : annotated.spans) {
    spans.push_back({{"start", span.start}, {"end", span.end}, {"attribute", span.attribute}, {"text", span.text}});
  }
  j["spans"] = std::move(spans);
  return j.dump();
}

std::vector<AnnotatedExample> read_annotated(const std::filesystem::path& path) {
  std::vector<AnnotatedExample> corpus;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      corpus.push_back(annotated_from_json(lines[i]));
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return corpus;
}

void write_annotated(const std::filesystem::path& path, const std::vector<AnnotatedExample>& corpus) {
  std::ofstream out(path);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  for (const AnnotatedExample& annotated : corpus) out << annotated_to_json(annotated) << "\n";
}

AnnotatedExample augment(const AnnotatedExample& annotated, const KnowledgeBase& attribute_kb, std::size_t k,
                         double min_sim, std::uint64_t seed) {
  if (k == 0) throw Error("InvalidArgument", "k must be at least 1");
  std::vector<std::size_t> eligible;
  std::vector<std::vector<const AttributeEntry*>> candidates(annotated.spans.size());
  std::string first_blocked;
  for (std::size_t i = 0; i < annotated.spans.size(); ++i) {
    const LabeledSpan& span = annotated.spans[i];
    if (span.attribute.empty()) continue;
    for (const AttributeEntry* entry : attribute_kb.attribute_group(span.attribute)) {
      if (entry->fragment.str() != span.braille && similarity(entry->fragment.str(), span.braille) >= min_sim) {
        candidates[i].push_back(entry);
      }
    }
    if (candidates[i].empty()) {
      if (first_blocked.empty()) first_blocked = span.braille + " (" + span.attribute + ")";
    } else {
      eligible.push_back(i);
    }
  }
  if (eligible.size() < k) {
    throw Error("InsufficientCandidates", "only " + std::to_string(eligible.size()) + " of " + std::to_string(k) +
                                              " spans have candidates" +
                                              (first_blocked.empty() ? std::string() : "; none for " + first_blocked));
  }

  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(eligible));
  eligible.resize(k);
  std::sort(eligible.begin(), eligible.end());

  std::vector<LabeledSpan> spans = annotated.spans;
  for (std::size_t i : eligible) {
    const auto& group = candidates[i];
    const AttributeEntry& chosen = *group[rng.index(group.size())];
    spans[i].braille = chosen.fragment.str();
    spans[i].text = chosen.text;
  }
  return make_annotated(annotated.example, std::move(spans));
}

namespace {

// An aligned example cut into units and the gaps around them: gap 0, unit 0,
// gap 1, ..., unit N-1, gap N on each side.
struct Units {
  std::vector<std::u32string> text_units;
  std::vector<std::u32string> text_gaps;
  std::vector<std::string> braille_units;
  std::vector<std::string> braille_gaps;

  std::size_t size() const { return text_units.size(); }
};

Units decompose(const ParallelExample& example) {
  const std::u32string text = decode_utf8(example.text);
  Units units;
  std::size_t text_at = 0;
  std::size_t braille_at = 0;
  for (const AlignmentPair& pair : example.alignment) {
    units.text_gaps.push_back(text.substr(text_at, pair.text_start - text_at));
    units.text_units.push_back(text.substr(pair.text_start, pair.text_end - pair.text_start));
    units.braille_gaps.push_back(example.braille.substr(braille_at, pair.braille_start - braille_at));
    units.braille_units.push_back(example.braille.substr(pair.braille_start, pair.braille_end - pair.braille_start));
    text_at = pair.text_end;
    braille_at = pair.braille_end;
  }
  units.text_gaps.push_back(text.substr(text_at));
  units.braille_gaps.push_back(example.braille.substr(braille_at));
  return units;
}

ParallelExample compose(const ParallelExample& base, const Units& units) {
  ParallelExample out = base;
  std::u32string text;
  out.braille.clear();
  out.alignment.clear();
  for (std::size_t i = 0; i < units.size(); ++i) {
    text += units.text_gaps[i];
    out.braille += units.braille_gaps[i];
    AlignmentPair pair;
    pair.text_start = text.size();
    pair.braille_start = out.braille.size();
    text += units.text_units[i];
    out.braille += units.braille_units[i];
    pair.text_end = text.size();
    pair.braille_end = out.braille.size();
    out.alignment.push_back(pair);
  }
  text += units.text_gaps.back();
  out.braille += units.braille_gaps.back();
  out.text = encode_utf8(text);
  // Per-word Pinyin no longer matches the edited text.
  out.pinyin.clear();
  return out;
}

template <typename Str>
void delete_unit(std::vector<Str>& unit_list, std::vector<Str>& gaps, std::size_t i) {
  const std::size_t n = unit_list.size();
  std::size_t drop = 0;
  if (i == 0) drop = 1;
  else if (i == n - 1) drop = i;
  else drop = gaps[i].empty() ? i : i + 1;
  gaps.erase(gaps.begin() + static_cast<std::ptrdiff_t>(drop));
  unit_list.erase(unit_list.begin() + static_cast<std::ptrdiff_t>(i));
}

template <typename Str>
void duplicate_unit(std::vector<Str>& unit_list, std::vector<Str>& gaps, std::size_t i, const Str& fallback) {
  const std::size_t n = unit_list.size();
  Str separator = i + 1 < n ? gaps[i + 1] : i > 0 ? gaps[i] : fallback;
  unit_list.insert(unit_list.begin() + static_cast<std::ptrdiff_t>(i) + 1, unit_list[i]);
  gaps.insert(gaps.begin() + static_cast<std::ptrdiff_t>(i) + 1, separator);
}

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("InvalidRate", "rate must lie in [0, 1]");
}

void check_example(const ParallelExample& example, std::size_t index) {
  const auto issues = validate_example(example);
  if (!issues.empty()) {
    throw Error("InvalidExample", "example " + std::to_string(index) + " (" + example.id + "): " +
                                      std::string(to_string(issues.front().kind)) + " " + issues.front().detail);
  }
}

// Exactly `count` distinct indices in [0, n), ascending.
std::vector<std::size_t> pick(Rng& rng, std::size_t n, std::size_t count) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + rng.index(n - i)]);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

std::size_t selection_size(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

}  // namespace

std::vector<ParallelExample> noise_inject(const std::vector<ParallelExample>& corpus, double rate,
                                          std::uint64_t seed, NoiseStats* stats) {
  check_rate(rate);
  std::vector<ParallelExample> out;
  out.reserve(corpus.size());
  NoiseStats local;
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    const ParallelExample& example = corpus[e];
    if (example.alignment.empty()) {
      out.push_back(example);
      local.selected_per_example.push_back(0);
      continue;
    }
    check_example(example, e);
    Rng rng(derive_seed(seed, e));
    const std::size_t n = example.alignment.size();
    const std::vector<std::size_t> chosen = pick(rng, n, selection_size(rate, n));
    std::vector<bool> deletes;
    for (std::size_t c = 0; c < chosen.size(); ++c) deletes.push_back(rng.coin());

    Units units = decompose(example);
    const std::u32string text_fallback = example.language == Language::Chinese ? U"" : U" ";
    for (std::size_t c = chosen.size(); c-- > 0;) {
      const std::size_t i = chosen[c];
      if (deletes[c] && units.size() > 1) {
        delete_unit(units.text_units, units.text_gaps, i);
        delete_unit(units.braille_units, units.braille_gaps, i);
        ++local.deleted;
      } else {
        duplicate_unit(units.text_units, units.text_gaps, i, text_fallback);
        duplicate_unit(units.braille_units, units.braille_gaps, i, std::string(" "));
        ++local.duplicated;
      }
    }
    local.selected += chosen.size();
    local.selected_per_example.push_back(chosen.size());
    out.push_back(compose(example, units));
  }
  if (stats != nullptr) *stats = std::move(local);
  return out;
}

std::vector<ParallelExample> fragment_replace(const std::vector<ParallelExample>& corpus, const KnowledgeBase& kb,
                                              double rate, std::uint64_t seed, NoiseStats* stats) {
  check_rate(rate);
  std::vector<std::pair<std::string, std::string>> pool;
  if (!kb.attribute_entries().empty()) {
    for (const AttributeEntry& entry : kb.attribute_entries()) pool.emplace_back(entry.fragment.str(), entry.text);
  } else {
    for (const PriorEntry& entry : kb.entries()) pool.emplace_back(entry.fragment.str(), entry.counterpart);
  }
  NoiseStats local;
  std::vector<ParallelExample> out;
  out.reserve(corpus.size());
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    const ParallelExample& example = corpus[e];
    if (example.alignment.empty() || example.language != kb.language()) {
      out.push_back(example);
      local.selected_per_example.push_back(0);
      continue;
    }
    check_example(example, e);
    const std::size_t n = example.alignment.size();
    const std::size_t count = selection_size(rate, n);
    if (count > 0 && pool.empty()) throw Error("EmptyKnowledgeBase", "no fragments to draw replacements from");
    Rng rng(derive_seed(seed, e));
    Units units = decompose(example);
    for (std::size_t i : pick(rng, n, count)) {
      const auto& [fragment, text] = pool[rng.index(pool.size())];
      units.braille_units[i] = fragment;
      units.text_units[i] = decode_utf8(text);
      ++local.replaced;
    }
    local.selected += count;
    local.selected_per_example.push_back(count);
    out.push_back(compose(example, units));
  }
  if (stats != nullptr) *stats = std::move(local);
  return out;
}

}  // namespace braillekit
