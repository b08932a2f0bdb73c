#pragma once

// Constituent replacement over annotated examples, plus the deletion/insertion
// and random-fragment baselines.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "braillekit/dataset.hpp"
#include "braillekit/knowledge_base.hpp"

namespace braillekit {

// A constituent over Braille words [start, end). An empty attribute marks an
// unlabeled stretch; labeled spans are the replacement sites.
struct LabeledSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string attribute;
  std::string braille;  // the covered words, space separated
  std::string text;
  friend bool operator==(const LabeledSpan&, const LabeledSpan&) = default;
};

// The spans tile the Braille words in order. Braille is the span Braille
// joined by spaces; text is the span texts joined by "" (zh) or " " (en); the
// alignment has one pair per span.
struct AnnotatedExample {
  ParallelExample example;
  std::vector<LabeledSpan> spans;
  friend bool operator==(const AnnotatedExample&, const AnnotatedExample&) = default;
};

// Rebuilds braille, text, alignment and word indices from the span contents.
// Throws Error("InvalidAnnotation") for empty or malformed spans.
AnnotatedExample make_annotated(ParallelExample base, std::vector<LabeledSpan> spans);

// Problems with the span tiling or its agreement with the example.
std::vector<std::string> annotation_problems(const AnnotatedExample& annotated);

// Labels each Braille word of an aligned example with the first attribute KB
// entry for that fragment. Throws Error("InvalidAnnotation") when the text
// cannot be cut at word boundaries.
AnnotatedExample tag_spans(const ParallelExample& example, const KnowledgeBase& attribute_kb);

// JSON object: the ParallelExample fields plus either
//   "spans": [{"start", "end", "attribute", "text"}...]  (indices into the Braille words)
// or
//   "tree": {"label", "children": [...]} with leaves {"label", "braille", "text"}.
// Leaves become spans labeled with their own label. Throws Error("ParseError")
// or Error("InvalidAnnotation").
AnnotatedExample annotated_from_json(std::string_view line);
std::string annotated_to_json(const AnnotatedExample& annotated);
std::vector<AnnotatedExample> read_annotated(const std::filesystem::path& path);
void write_annotated(const std::filesystem::path& path, const std::vector<AnnotatedExample>& corpus);

// Replaces exactly k labeled spans with same-attribute KB entries whose
// fragment differs from the span and whose similarity to it is >= min_sim.
// Throws Error("InvalidArgument") for k == 0 and
// Error("InsufficientCandidates") when fewer than k spans have a candidate.
AnnotatedExample augment(const AnnotatedExample& annotated, const KnowledgeBase& attribute_kb, std::size_t k,
                         double min_sim, std::uint64_t seed);

struct NoiseStats {
  std::size_t selected = 0;
  std::size_t deleted = 0;
  std::size_t duplicated = 0;
  std::size_t replaced = 0;
  std::vector<std::size_t> selected_per_example;
};

// Per aligned example, picks exactly round(rate * N) of its N alignment pairs
// and deletes or duplicates each with probability 1/2 on both sides. Unaligned
// examples pass through. Throws Error("InvalidRate") unless 0 <= rate <= 1 and
// Error("InvalidExample") for examples that fail validation.
std::vector<ParallelExample> noise_inject(const std::vector<ParallelExample>& corpus, double rate,
                                          std::uint64_t seed, NoiseStats* stats = nullptr);

// Per aligned example of the KB's language, replaces round(rate * N) pairs
// with a uniformly drawn KB fragment and its text. The pool is the attribute
// table when it is non-empty (attributes ignored), otherwise the priors.
// Examples in another language pass through.
std::vector<ParallelExample> fragment_replace(const std::vector<ParallelExample>& corpus, const KnowledgeBase& kb,
                                              double rate, std::uint64_t seed, NoiseStats* stats = nullptr);

}  // namespace braillekit
