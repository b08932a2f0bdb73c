// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "braillekit/augment.hpp"
#include "braillekit/bkft.hpp"
#include "braillekit/braille.hpp"
#include "braillekit/dataset.hpp"
#include "braillekit/metrics.hpp"
#include "braillekit/rng.hpp"
#include "braillekit/synthetic.hpp"
#include "braillekit/text_util.hpp"
#include "braillekit/tokenizer.hpp"
#include "braillekit/toy_train.hpp"
#include "braillekit/transcribe.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace braillekit;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string hex_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

// 1 -------------------------------------------------------------------------

void codec(Outcome& out) {
  const auto start = Clock::now();
  std::size_t chart_rows = 0;
  for (const auto& row : oracle::chart()) {
    out.require(kBrailleAscii[oracle::dots_to_mask(row.dots)] == row.ascii,
                std::string("chart mismatch for '") + row.ascii + "'");
    ++chart_rows;
  }
  for (char c : kBrailleAscii) {
    const std::string s(1, c);
    out.require(unicode_to_ascii(ascii_to_unicode(s)) == s, std::string("round trip of '") + c + "'");
  }
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    for (std::size_t k = 0, n = rng.index(64); k < n; ++k) s += kBrailleAscii[rng.index(64)];
    out.require(unicode_to_ascii(ascii_to_unicode(s)) == s, "random round trip");
  }
  const double elapsed = seconds_since(start);
  out.require(elapsed < 1.0, "runtime");
  out.detail << chart_rows << " chart rows, 64 chars + 10000 strings round-trip, " << elapsed << " s (< 1 s)";
}

// 2 -------------------------------------------------------------------------

void golden(Outcome& out) {
  KnowledgeBase kc = KnowledgeBase::load(testing::data("kb/zh_prior.tsv"), Language::Chinese);
  kc.load_words(testing::data("kb/words.tsv"));
  const KnowledgeBase ke = KnowledgeBase::load(testing::data("kb/en_prior.tsv"), Language::English);
  const RuleSet rules = RuleSet::load(testing::data("rules/math_braille.tsv"));
  const CharPinyinTable readings = CharPinyinTable::load(testing::data("kb/char_pinyin.tsv"));
  const TranscribeContext context{&rules, &kc, &ke, &readings};

  const std::string tokens = segment(BrailleSequence::parse("G*AGI D KYSU F9/V'"), kc).render_tokens();
  out.require(tokens == "<|G*A|><|GI|><|D|><|KY|><|SU|><|F9|><|/V'|>", "tokenization: " + tokens);
  const std::string words = word_segment("G*AGIDKYSU F9/V'", kc).str();
  out.require(words == "G*AGI D KYSU F9/V'", "word segmentation: " + words);
  const std::string formula = transcribe_mixed("$\\frac{1}{4}x=15$", context).str();
  out.require(formula == "#A4;X 7#AE", "formula: " + formula);
  const std::string mixed = transcribe_mixed("故答案为：$y$", context, {"gu4", "da2an4", "wei2"}).str();
  out.require(mixed == "GU D91V W- #Y", "mixed Chinese: " + mixed);

  VocabEmbedding model{VocabIndex(std::vector<std::string>{"the", "least", "and"}), EmbeddingTable(3, 8)};
  Rng rng(2);
  for (double& v : model.table.data()) v = rng.normal();
  model = extend_vocab(std::move(model), std::vector<std::string>{"L1/"});
  const auto syllables = SyllableTokenMap::build(model.vocab, readings);
  init_all(model, kc, ke, syllables);
  const auto braille = model.table.row(*model.vocab.find("<|L1/|>"));
  const auto least = model.table.row(*model.vocab.find("least"));
  out.require(std::memcmp(braille.data(), least.data(), braille.size_bytes()) == 0, "L1/ clone of least");
  out.detail << "tokens " << tokens << "; wordseg \"" << words << "\"; formula \"" << formula << "\"; mixed \""
             << mixed << "\"; <|L1/|> == least bitwise";
}

// 3 -------------------------------------------------------------------------

void homophone_mean(Outcome& out) {
  Rng rng(3);
  double worst = 0.0;
  std::size_t configs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.index(64);
    const std::size_t members = 1 + rng.index(20);
    const std::size_t distractors = rng.index(10);
    std::vector<std::string> names;
    std::string tsv;
    std::vector<std::size_t> member_rows;
    char32_t next = 0x4E00;
    for (std::size_t i = 0; i < members + distractors; ++i) {
      std::string ch;
      append_utf8(ch, next++);
      names.push_back(ch);
    }
    Rng order(rng.next());
    order.shuffle(std::span<std::string>(names));
    for (std::size_t r = 0; r < names.size(); ++r) {
      const bool member = decode_utf8(names[r])[0] < 0x4E00 + members;
      tsv += names[r] + (member ? "\tshi4\n" : "\tshi2\n");
      if (member) member_rows.push_back(r);
    }
    VocabEmbedding model{VocabIndex(names), EmbeddingTable(names.size(), dim)};
    for (double& v : model.table.data()) v = rng.normal() * std::exp(4.0 * rng.normal());
    const EmbeddingTable original = model.table;
    model = extend_vocab(std::move(model), std::vector<std::string>{"S"});
    std::istringstream readings_in(tsv);
    const auto readings = CharPinyinTable::parse(readings_in);
    const KnowledgeBase kc = testing::kb_from("S\tshi4\n", Language::Chinese);
    const KnowledgeBase ke(Language::English);
    const InitReport report = init_all(model, kc, ke, SyllableTokenMap::build(model.vocab, readings));
    out.require(report.chinese_inited == 1, "fragment initialised");

    std::vector<std::vector<double>> rows;
    for (std::size_t r : member_rows) rows.emplace_back(original.row(r).begin(), original.row(r).end());
    const auto expected = oracle::mean_rows(rows);
    const auto got = model.table.row(*model.vocab.find("<|S|>"));
    for (std::size_t i = 0; i < dim; ++i) worst = std::max(worst, std::abs(got[i] - expected[i]));
    for (std::size_t r = 0; r < original.rows(); ++r) {
      out.require(std::memcmp(model.table.row(r).data(), original.row(r).data(), original.row(r).size_bytes()) == 0,
                  "pre-existing row changed");
    }
    ++configs;
  }
  out.require(worst <= 1e-12, "max deviation " + std::to_string(worst));
  out.detail << configs << " configs, max |E[b] - mean| = " << worst << " (<= 1e-12), original rows bitwise unchanged";
}

// 4 -------------------------------------------------------------------------

std::string random_text(Rng& rng) {
  static const std::vector<std::string> vocab{"a", "b", "ab", "ba", "c", "abc", "d", "the", "cat", "on"};
  std::string s;
  for (std::size_t i = 0, n = rng.index(9); i < n; ++i) {
    if (i) s += ' ';
    s += vocab[rng.index(vocab.size())];
  }
  return s;
}

void metric_oracles(Outcome& out) {
  const auto start = Clock::now();
  Rng rng(4);
  double worst_cer = 0.0;
  double worst_ter = 0.0;
  double worst_chrf = 0.0;
  double worst_bleu = 0.0;
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
  for (int i = 0; i < 500; ++i) {
    const std::string h = random_text(rng);
    std::string r = random_text(rng);
    if (r.empty()) r = "cat";
    hyps.push_back(h);
    refs.push_back(r);
    const auto hw = oracle::words(h);
    const auto rw = oracle::words(r);
    pairs.emplace_back(hw, rw);

    const double cer_expected = double(oracle::edit_distance(oracle::chars(h), oracle::chars(r))) / double(r.size());
    worst_cer = std::max(worst_cer, std::abs(cer(h, r) - cer_expected));
    const auto [edits, shifts] = oracle::ter_edits_shifts(hw, rw);
    const double ter_expected = 100.0 * double(edits + shifts) / double(rw.size());
    worst_ter = std::max(worst_ter, std::abs(ter(hw, rw) - ter_expected));
    worst_chrf = std::max(worst_chrf, std::abs(chrf_pp(h, r) - oracle::chrf(h, r)));
    worst_bleu = std::max(worst_bleu, std::abs(bleu_score(bleu_stats(hw, rw)) - oracle::bleu({{hw, rw}})));
  }
  worst_bleu = std::max(worst_bleu, std::abs(corpus_bleu(hyps, refs, 4, Tokenize::Whitespace) - oracle::bleu(pairs)));
  out.require(worst_cer <= 1e-9, "CER");
  out.require(worst_ter <= 1e-9, "TER");
  out.require(worst_chrf <= 1e-9, "chrF++");
  out.require(worst_bleu <= 1e-9, "BLEU");

  MetricConfig config;
  const MetricReport same = evaluate(refs, refs, config);
  const bool identity = *same.corpus.cer == 0.0 && *same.corpus.ter == 0.0 && *same.corpus.chrf == 100.0 &&
                        *same.corpus.bleu == 100.0;
  out.require(identity, "identity scores");
  const double elapsed = seconds_since(start);
  out.require(elapsed < 30.0, "runtime");
  out.detail << "500 pairs, max |diff| CER " << worst_cer << " TER " << worst_ter << " chrF++ " << worst_chrf
             << " BLEU " << worst_bleu << " (<= 1e-9); identity " << *same.corpus.cer << "/" << *same.corpus.ter
             << "/" << *same.corpus.chrf << "/" << *same.corpus.bleu << "; " << elapsed << " s (< 30 s)";
}

// 5 -------------------------------------------------------------------------

// Independent bijection check: text spans tile the text's code points, Braille
// spans tile the words, one pair per unit, in order.
bool alignment_bijective(const ParallelExample& ex) {
  const std::size_t text_len = decode_utf8(ex.text).size();
  std::vector<std::pair<std::size_t, std::size_t>> words;
  std::size_t s = 0;
  for (std::size_t i = 0; i <= ex.braille.size(); ++i) {
    if (i == ex.braille.size() || ex.braille[i] == ' ') {
      words.emplace_back(s, i);
      s = i + 1;
    }
  }
  std::size_t text_at = 0;
  std::size_t word_at = 0;
  for (const auto& p : ex.alignment) {
    if (p.text_start != text_at || p.text_end <= p.text_start) return false;
    text_at = p.text_end;
    if (word_at >= words.size() || p.braille_start != words[word_at].first) return false;
    while (word_at < words.size() && words[word_at].second <= p.braille_end) {
      if (words[word_at].second == p.braille_end) break;
      ++word_at;
    }
    if (word_at >= words.size() || words[word_at].second != p.braille_end) return false;
    ++word_at;
  }
  return text_at == text_len && word_at == words.size();
}

void augmentation(Outcome& out) {
  KnowledgeBase attributes(Language::Chinese);
  attributes.load_attributes(testing::data("kb/attributes.tsv"));
  const auto corpus = read_annotated(testing::data("corpus/scientist_annotated.jsonl"));
  const AnnotatedExample& source = corpus.at(0);
  std::size_t runs = 0;
  std::set<std::string> distinct;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const std::size_t k = 1 + seed % 3;
    const AnnotatedExample result = augment(source, attributes, k, 0.0, seed);
    out.require(validate_example(result.example).empty(), "validate_example");
    out.require(validate(result.example.braille).ok(), "validate");
    std::size_t differing = 0;
    for (std::size_t i = 0; i < source.spans.size(); ++i) differing += source.spans[i].braille != result.spans[i].braille;
    out.require(differing == k, "span diff");
    out.require(alignment_bijective(result.example), "bijection");
    distinct.insert(result.example.braille);
    ++runs;
  }

  NoiseStats stats;
  const ParallelExample base = testing::aligned_example(100, 5);
  const auto noisy = noise_inject({base}, 0.15, 5, &stats);
  out.require(stats.selected == 15 && stats.deleted + stats.duplicated == 15, "noise count");
  out.require(noisy.at(0).alignment.size() == 100 - stats.deleted + stats.duplicated, "noise alignment size");
  out.require(validate_example(noisy[0]).empty() && alignment_bijective(noisy[0]), "noise validity");
  out.detail << runs << " augmentations (k = 1..3) valid, exact span diff, bijective alignment, " << distinct.size()
             << " distinct; noise_inject modified " << stats.selected << " of 100 pairs (" << stats.deleted
             << " deleted, " << stats.duplicated << " duplicated)";
}

// 6 -------------------------------------------------------------------------

void perturbation(Outcome& out) {
  Rng rng(6);
  std::vector<std::string> words;
  for (int w = 0; w < 2000; ++w) words.push_back(testing::random_cells(rng, 5));
  const BrailleSequence s = BrailleSequence::from_words(words);
  auto mask = [](char c) {
    for (const auto& row : oracle::chart()) {
      if (row.ascii == c) return oracle::dots_to_mask(row.dots);
    }
    return c == kBlankCell ? 0U : 0xFFU;
  };
  const BrailleSequence p = perturb_dots(s, 0.05, 6);
  std::size_t dots = 0;
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < s.str().size(); ++i) {
    if (s.str()[i] == ' ') {
      out.require(p.str()[i] == ' ', "separator touched");
      continue;
    }
    dots += 6;
    flipped += static_cast<std::size_t>(__builtin_popcount(mask(s.str()[i]) ^ mask(p.str()[i])));
  }
  const double fraction = double(flipped) / double(dots);
  out.require(dots >= 60000, "dot count");
  out.require(std::abs(fraction - 0.05) <= 0.005, "flip fraction");
  out.require(perturb_dots(s, 0.0, 6) == s, "rate 0 identity");
  out.detail << dots << " dots, flip fraction " << fraction << " (0.05 +- 0.005); rate 0 is the identity";
}

// 7 -------------------------------------------------------------------------

void gradient(Outcome& out) {
  Rng rng(7);
  const double eps = 1e-6;
  double worst = 0.0;
  for (int config = 0; config < 5; ++config) {
    const std::size_t rows = 4 + rng.index(6);
    const std::size_t dim = 2 + rng.index(7);
    const std::size_t classes = 2 + rng.index(6);
    EmbeddingTable table(rows, dim);
    for (double& v : table.data()) v = rng.normal();
    ToyModel m(table, classes);
    for (double& w : m.weights) w = rng.normal();
    for (double& b : m.bias) b = rng.normal();
    std::vector<SequencePair> batch(1 + rng.index(4));
    for (auto& pair : batch) {
      for (std::size_t t = 0, n = 1 + rng.index(6); t < n; ++t) {
        pair.source.push_back(rng.index(rows));
        pair.target.push_back(rng.index(classes));
      }
    }
    const Gradient g = backward(m, batch);
    double diff = 0.0;
    double na = 0.0;
    double nn = 0.0;
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + eps;
      const double up = forward_nll(m, batch);
      param = saved - eps;
      const double down = forward_nll(m, batch);
      param = saved;
      const double numeric = (up - down) / (2 * eps);
      diff += (analytic - numeric) * (analytic - numeric);
      na += analytic * analytic;
      nn += numeric * numeric;
    };
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row = g.embedding_row(r, dim);
      for (std::size_t i = 0; i < dim; ++i) probe(m.embedding.row(r)[i], row[i]);
    }
    for (std::size_t i = 0; i < m.weights.size(); ++i) probe(m.weights[i], g.weights[i]);
    for (std::size_t k = 0; k < classes; ++k) probe(m.bias[k], g.bias[k]);
    const double rel = std::sqrt(diff) / std::max(std::sqrt(na), std::sqrt(nn));
    worst = std::max(worst, rel);
  }
  out.require(worst <= 1e-5, "relative error");
  out.detail << "5 configs, worst ||g - g_fd|| / max(||g||, ||g_fd||) = " << worst << " (<= 1e-5, eps 1e-6)";
}

// 8 -------------------------------------------------------------------------

TrainConfig experiment_config(InitMode mode) {
  TrainConfig c;
  c.learning_rate = 0.5;
  c.batch_size = 50;
  c.epochs = 300;
  c.init_mode = mode;
  return c;
}

TaskFactory synthetic_factory(bool shuffled) {
  return [shuffled](std::uint64_t seed) {
    SyntheticConfig sc;
    sc.seed = seed;
    sc.shuffled_kb = shuffled;
    return make_synthetic_task(sc);
  };
}

void bkft_effect(Outcome& out) {
  const auto start = Clock::now();
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  const ExperimentReport oracle_kb = run_experiment(synthetic_factory(false), experiment_config(InitMode::Bkft),
                                                    experiment_config(InitMode::Random), seeds, 1);
  const ExperimentReport shuffled = run_experiment(synthetic_factory(true), experiment_config(InitMode::Bkft),
                                                   experiment_config(InitMode::Random), seeds, 1);
  const double bkft = oracle_kb.bkft.median_epochs_to_target;
  const double random = oracle_kb.random.median_epochs_to_target;
  const double ablation = shuffled.bkft.median_epochs_to_target;
  const double ablation_random = shuffled.random.median_epochs_to_target;
  const double ratio = ablation / ablation_random;
  out.require(std::isfinite(bkft) && bkft < random, "bkft faster than random");
  out.require(std::isfinite(ratio) && ratio >= 0.8 && ratio <= 1.25, "shuffled ratio");
  const double elapsed = seconds_since(start);
  out.require(elapsed < 120.0, "runtime");
  out.detail << "median epochs to 90% held-out accuracy over seeds 1-5: bkft " << bkft << " vs random " << random
             << "; shuffled KB bkft " << ablation << " vs random " << ablation_random << " (ratio " << ratio
             << ", in [0.8, 1.25]); " << elapsed << " s single-threaded (< 120 s)";
}

// 9 -------------------------------------------------------------------------

std::string randomized_outputs() {
  std::ostringstream s;
  Rng rng(9);
  for (int i = 0; i < 5; ++i) s << rng.next() << ' ' << hex_double(rng.normal()) << ' ';
  Rng cells(90);
  s << perturb_dots(BrailleSequence::parse(testing::random_cells(cells, 400)), 0.1, 9).str() << '\n';

  KnowledgeBase attributes(Language::Chinese);
  attributes.load_attributes(testing::data("kb/attributes.tsv"));
  const auto corpus = read_annotated(testing::data("corpus/scientist_annotated.jsonl"));
  for (std::uint64_t seed = 0; seed < 20; ++seed) s << annotated_to_json(augment(corpus[0], attributes, 2, 0.0, seed)) << '\n';

  std::vector<ParallelExample> examples;
  for (std::uint64_t e = 0; e < 10; ++e) examples.push_back(testing::aligned_example(12, e));
  for (const auto& ex : noise_inject(examples, 0.3, 9)) s << example_to_json(ex) << '\n';
  const KnowledgeBase kc = KnowledgeBase::load(testing::data("kb/zh_prior.tsv"), Language::Chinese);
  for (const auto& ex : fragment_replace(examples, kc, 0.3, 9)) s << example_to_json(ex) << '\n';
  for (const auto& b : schedule_batches(7, 4, 9).batches) s << int(b.source) << b.index << ' ';

  SyntheticConfig sc;
  sc.seed = 9;
  const ToyTask task = make_synthetic_task(sc);
  for (const auto& f : task.fragments) s << f << ' ';
  for (const auto& ex : task.train_chinese) s << ex.targets.front() << ' ';
  for (double v : task.base.table.data()) s << hex_double(v) << ' ';
  TrainConfig c = experiment_config(InitMode::Random);
  c.epochs = 5;
  c.seed = 9;
  const ExperimentReport parallel = run_experiment(synthetic_factory(false), experiment_config(InitMode::Bkft),
                                                   experiment_config(InitMode::Random), {9, 10}, 2);
  for (const auto* arm : {&parallel.bkft, &parallel.random}) {
    for (const auto& run : arm->runs) {
      for (const auto& p : run.epochs) s << hex_double(p.train_loss) << ' ';
    }
  }
  for (const auto& p : train_arm(task, c).epochs) s << hex_double(p.train_loss) << hex_double(p.held_out_accuracy);
  return s.str();
}

void determinism(Outcome& out) {
  const std::string first = randomized_outputs();
  const std::string second = randomized_outputs();
  out.require(first == second, "outputs differ between runs");
  out.detail << "two consecutive runs of Rng, perturb_dots, augment, noise_inject, fragment_replace, "
                "schedule_batches, synthetic task, train_arm and run_experiment (2 threads): "
             << first.size() << " bytes, identical";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"codec round trip and chart", codec},
      {"golden pairs", golden},
      {"homophone-mean initialisation", homophone_mean},
      {"metric oracles", metric_oracles},
      {"augmentation validity", augmentation},
      {"perturbation statistics", perturbation},
      {"gradient check", gradient},
      {"knowledge-based initialisation effect", bkft_effect},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      criteria[i].second(outcome);
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail << "exception: " << e.what();
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": "
              << outcome.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
