#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "braillekit/braille.hpp"
#include "braillekit/knowledge_base.hpp"
#include "braillekit/metrics.hpp"
#include "braillekit/rng.hpp"
#include "braillekit/tokenizer.hpp"

using namespace braillekit;

namespace {

std::string random_braille(std::size_t words, std::uint64_t seed) {
  Rng rng(seed);
  std::string s;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) s += ' ';
    for (std::size_t c = 0, n = 1 + rng.index(4); c < n; ++c) s += kBrailleAscii[1 + rng.index(63)];
  }
  return s;
}

const KnowledgeBase& chinese_kb() {
  static const KnowledgeBase kb =
      KnowledgeBase::load(std::string(BRAILLEKIT_BENCH_DATA_DIR) + "/kb/zh_prior.tsv", Language::Chinese);
  return kb;
}

void BM_AsciiToUnicode(benchmark::State& state) {
  const std::string s = random_braille(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(ascii_to_unicode(s));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * s.size()));
}
BENCHMARK(BM_AsciiToUnicode)->Arg(100)->Arg(10000);

void BM_UnicodeToAscii(benchmark::State& state) {
  const std::string s = ascii_to_unicode(random_braille(static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(unicode_to_ascii(s));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * s.size()));
}
BENCHMARK(BM_UnicodeToAscii)->Arg(100)->Arg(10000);

void BM_Segment(benchmark::State& state) {
  const BrailleSequence s = BrailleSequence::parse(random_braille(static_cast<std::size_t>(state.range(0)), 3));
  for (auto _ : state) benchmark::DoNotOptimize(segment(s, chinese_kb()));
}
BENCHMARK(BM_Segment)->Arg(100)->Arg(1000);

void BM_WordSegment(benchmark::State& state) {
  std::string s = random_braille(static_cast<std::size_t>(state.range(0)), 4);
  std::erase(s, ' ');
  for (auto _ : state) benchmark::DoNotOptimize(word_segment(s, chinese_kb()));
}
BENCHMARK(BM_WordSegment)->Arg(50)->Arg(200);

void BM_CorpusMetrics(benchmark::State& state) {
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(state.range(0)); ++i) {
    hyps.push_back(random_braille(20, 10 + i));
    refs.push_back(random_braille(20, 5000 + i));
  }
  MetricConfig config;
  config.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(hyps, refs, config));
}
BENCHMARK(BM_CorpusMetrics)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
