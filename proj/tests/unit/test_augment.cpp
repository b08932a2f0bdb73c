#include <set>

#include "braillekit/augment.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace braillekit;

namespace {

const KnowledgeBase& attributes() {
  static const KnowledgeBase kb = [] {
    KnowledgeBase k(Language::Chinese);
    k.load_attributes(testing::data("kb/attributes.tsv"));
    return k;
  }();
  return kb;
}

const std::vector<AnnotatedExample>& scientist() {
  static const auto corpus = read_annotated(testing::data("corpus/scientist_annotated.jsonl"));
  return corpus;
}

std::size_t differing_spans(const AnnotatedExample& a, const AnnotatedExample& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.spans.size(); ++i) n += a.spans[i].braille != b.spans[i].braille;
  return n;
}

}  // namespace

TEST_CASE("both annotation forms load and agree with the example") {
  REQUIRE(scientist().size() == 2);
  const auto& tree = scientist()[0];
  const auto& spans = scientist()[1];
  CHECK(tree.example.braille == "IW N%K*AD K5AH)1G$A T1QUAL5 Q72H<AD LI'L3");
  CHECK(spans.example.braille == tree.example.braille);
  CHECK(tree.example.text == spans.example.text);
  CHECK(tree.spans.size() == 6);
  CHECK(spans.spans.size() == 5);
  CHECK(spans.spans[4].attribute.empty());
  for (const auto& a : scientist()) {
    CHECK(annotation_problems(a).empty());
    CHECK(validate_example(a.example).empty());
    CHECK(annotated_from_json(annotated_to_json(a)) == a);
  }
}

TEST_CASE("make_annotated rejects bad spans") {
  ParallelExample base;
  base.id = "x";
  CHECK_THROWS_AS(make_annotated(base, {}), Error);
  CHECK_THROWS_AS(make_annotated(base, {{0, 1, "Noun", "", "理论"}}), Error);
  CHECK_THROWS_AS(annotated_from_json(R"({"id":"x","language":"zh","tree":{"label":"S"}})"), Error);
}

TEST_CASE("quantifier replacement in the scientist sentence") {
  bool found = false;
  for (std::uint64_t seed = 0; seed < 400 && !found; ++seed) {
    const auto out = augment(scientist()[0], attributes(), 1, 0.0, seed);
    if (out.spans[0].braille == "B9A:1SVASW") {
      found = true;
      CHECK(out.example.braille == "B9A:1SVASW N%K*AD K5AH)1G$A T1QUAL5 Q72H<AD LI'L3");
      CHECK(out.example.text == "八十三位年轻的科学家提出了创新的理论");
    }
  }
  CHECK(found);
}

TEST_CASE("k and candidate rules") {
  try {
    augment(scientist()[0], attributes(), 0, 0.0, 1);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.kind() == "InvalidArgument");
  }
  try {
    augment(scientist()[0], attributes(), 7, 0.0, 1);
    FAIL("expected InsufficientCandidates");
  } catch (const Error& e) {
    CHECK(e.kind() == "InsufficientCandidates");
  }
  // One labeled span whose group has a single alternative.
  KnowledgeBase kb(Language::Chinese);
  kb.add_attribute({BrailleFragment::parse("LI'L3"), "Noun", "理论"});
  kb.add_attribute({BrailleFragment::parse("K5AH)1G$A"), "Noun", "科学家"});
  const auto& spans_form = scientist()[1];
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto out = augment(spans_form, kb, 1, 0.0, seed);
    CHECK(out.spans[2].braille == "LI'L3");
    CHECK(out.example.text == "一位年轻的理论提出了创新的理论");
  }
  CHECK_THROWS_AS(augment(spans_form, kb, 1, 0.99, 0), Error);
}

TEST_CASE("augmentations are valid, differ in exactly k spans and stay aligned") {
  for (std::size_t k : {1, 2, 3}) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto& src = scientist()[seed % 2];
      AnnotatedExample out;
      try {
        out = augment(src, attributes(), k, 0.0, seed);
      } catch (const Error& e) {
        CHECK(e.kind() == "InsufficientCandidates");
        continue;
      }
      CHECK(validate(out.example.braille).ok());
      CHECK(validate_example(out.example).empty());
      CHECK(annotation_problems(out).empty());
      CHECK(differing_spans(src, out) == k);
      CHECK(out.example.alignment.size() == out.spans.size());
      for (std::size_t i = 0; i < out.spans.size(); ++i) {
        if (out.spans[i].braille == src.spans[i].braille) continue;
        CHECK(out.spans[i].attribute == src.spans[i].attribute);
      }
    }
  }
}

TEST_CASE("distinct outputs grow with the number of seeds") {
  std::set<std::string> seen;
  std::size_t previous = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    seen.insert(augment(scientist()[0], attributes(), 1, 0.0, s).example.braille);
    CHECK(seen.size() >= previous);
    previous = seen.size();
  }
  CHECK(seen.size() > 5);
}

TEST_CASE("tag_spans labels words from the attribute table") {
  ParallelExample ex = scientist()[0].example;
  const auto tagged = tag_spans(ex, attributes());
  REQUIRE(tagged.spans.size() == 6);
  CHECK(tagged.spans[0].attribute == "Quantifier");
  CHECK(tagged.spans[3].attribute == "Verb");
  CHECK(tagged.spans[3].text == "提出了");
}

TEST_CASE("noise injection counts and validity") {
  NoiseStats stats;
  const auto ex = testing::aligned_example(100, 5);
  const auto out = noise_inject({ex}, 0.15, 9, &stats);
  CHECK(stats.selected == 15);
  CHECK(stats.deleted + stats.duplicated == 15);
  REQUIRE(out.size() == 1);
  CHECK(out[0].alignment.size() == 100 - stats.deleted + stats.duplicated);
  CHECK(validate_example(out[0]).empty());
  CHECK(noise_inject({ex}, 0.0, 9) == std::vector<ParallelExample>{ex});
  CHECK_THROWS_AS(noise_inject({ex}, 1.2, 9), Error);

  Rng rng(77);
  for (int corpus = 0; corpus < 200; ++corpus) {
    std::vector<ParallelExample> batch;
    for (std::size_t i = 0, n = 1 + rng.index(4); i < n; ++i) batch.push_back(testing::aligned_example(1 + rng.index(12), rng.next()));
    const double rate = rng.uniform();
    NoiseStats s;
    const auto noisy = noise_inject(batch, rate, rng.next(), &s);
    REQUIRE(noisy.size() == batch.size());
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      CHECK(validate_example(noisy[i]).empty());
      CHECK(s.selected_per_example[i] == static_cast<std::size_t>(std::llround(rate * double(batch[i].alignment.size()))));
      CHECK(noisy[i].alignment.size() >= 1);
    }
  }
}

TEST_CASE("fragment replacement draws from the knowledge base") {
  const auto kb = KnowledgeBase::load(testing::data("kb/zh_prior.tsv"), Language::Chinese);
  std::set<std::string> fragments;
  for (const auto& e : kb.entries()) fragments.insert(e.fragment.str());
  std::vector<ParallelExample> corpus;
  for (std::uint64_t s = 0; s < 20; ++s) corpus.push_back(testing::aligned_example(10, s));
  NoiseStats stats;
  const auto out = fragment_replace(corpus, kb, 0.3, 4, &stats);
  CHECK(stats.replaced == 60);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(validate_example(out[i]).empty());
    REQUIRE(out[i].alignment.size() == corpus[i].alignment.size());
    for (const auto& p : out[i].alignment) {
      const std::string unit = out[i].braille.substr(p.braille_start, p.braille_end - p.braille_start);
      if (fragments.count(unit) == 0) {
        bool original = false;
        for (const auto& q : corpus[i].alignment) {
          original |= corpus[i].braille.substr(q.braille_start, q.braille_end - q.braille_start) == unit;
        }
        CHECK(original);
      }
    }
  }
  CHECK(fragment_replace(corpus, kb, 0.0, 4) == corpus);

  KnowledgeBase one(Language::Chinese);
  one.add_prior({BrailleFragment::parse("HV2"), "han4", Language::Chinese, 1});
  NoiseStats s1;
  const auto single = fragment_replace({testing::aligned_example(10, 1)}, one, 1.0, 3, &s1);
  CHECK(s1.replaced == 10);
  CHECK(single[0].braille == "HV2 HV2 HV2 HV2 HV2 HV2 HV2 HV2 HV2 HV2");
  CHECK(single[0].text == "han4han4han4han4han4han4han4han4han4han4");

  ParallelExample en = testing::aligned_example(5, 2);
  en.language = Language::English;
  CHECK(fragment_replace({en}, one, 1.0, 3) == std::vector<ParallelExample>{en});
}

TEST_CASE("augmentation is deterministic under seed") {
  CHECK(augment(scientist()[0], attributes(), 2, 0.0, 42) == augment(scientist()[0], attributes(), 2, 0.0, 42));
  const auto ex = testing::aligned_example(30, 3);
  CHECK(noise_inject({ex}, 0.3, 8) == noise_inject({ex}, 0.3, 8));
}
