#include "braillekit/synthetic.hpp"

#include <numeric>

#include "braillekit/error.hpp"
#include "braillekit/rng.hpp"
#include "braillekit/text_util.hpp"

namespace braillekit {

namespace {

constexpr std::size_t kCellChoices = 63;  // non-blank cells

char cell(std::size_t i) { return kBrailleAscii[1 + i % kCellChoices]; }

std::string chinese_fragment(std::size_t i) { return {cell(i / kCellChoices), cell(i)}; }

// Three cells, so never equal to a two-cell Chinese fragment.
std::string english_fragment(std::size_t i) { return {'#', cell(i / kCellChoices), cell(i)}; }

std::string syllable_name(std::size_t i) {
  std::string name = "q";
  name += static_cast<char>('a' + (i / 26) % 26);
  name += static_cast<char>('a' + i % 26);
  name += static_cast<char>('1' + i % 4);
  return name;
}

std::string two_digits(std::size_t i) { return (i < 10 ? "0" : "") + std::to_string(i); }

}  // namespace

ToyTask make_synthetic_task(const SyntheticConfig& config) {
  if (config.dim == 0 || config.classes == 0 || config.syllables == 0 || config.homophones == 0) {
    throw Error("InvalidConfig", "synthetic sizes must be positive");
  }
  if (config.syllables > 26 * 26 || config.english_fragments > kCellChoices * kCellChoices) {
    throw Error("InvalidConfig", "too many fragments for the synthetic alphabet");
  }
  if (config.train_pairs < config.syllables) {
    throw Error("InvalidConfig", "train_pairs must cover every fragment once");
  }

  Rng rng(derive_seed(config.seed, 0));
  const std::size_t d = config.dim;
  std::vector<std::vector<double>> centres(config.classes, std::vector<double>(d));
  for (auto& centre : centres) {
    for (double& v : centre) v = rng.normal();
  }
  std::vector<std::size_t> syllable_class(config.syllables);
  for (std::size_t p = 0; p < config.syllables; ++p) syllable_class[p] = p % config.classes;
  rng.shuffle(std::span<std::size_t>(syllable_class));

  ToyTask task;
  for (std::size_t c = 0; c < config.classes; ++c) task.class_names.push_back("c" + two_digits(c));

  std::vector<std::vector<double>> rows;
  auto add_token = [&](std::string name, std::size_t cls) {
    task.base.vocab.add(std::move(name));
    std::vector<double> row(d);
    for (std::size_t i = 0; i < d; ++i) row[i] = centres[cls][i] + config.noise * rng.normal();
    rows.push_back(std::move(row));
  };
  for (std::size_t p = 0; p < config.syllables; ++p) {
    for (std::size_t h = 0; h < config.homophones; ++h) {
      std::string character;
      append_utf8(character, static_cast<char32_t>(0x4E00 + p * config.homophones + h));
      task.char_pinyin.add(character, syllable_name(p));
      add_token(std::move(character), syllable_class[p]);
    }
  }
  std::vector<std::size_t> word_class(config.english_fragments);
  for (std::size_t j = 0; j < config.english_fragments; ++j) {
    word_class[j] = rng.index(config.classes);
    add_token("w" + two_digits(j), word_class[j]);
  }
  task.base.table = EmbeddingTable(rows.size(), d);
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), task.base.table.row(r).begin());

  std::vector<std::size_t> spelled(config.syllables);
  std::iota(spelled.begin(), spelled.end(), std::size_t{0});
  if (config.shuffled_kb) {
    Rng shuffle(derive_seed(config.seed, 1));
    shuffle.shuffle(std::span<std::size_t>(spelled));
  }
  for (std::size_t p = 0; p < config.syllables; ++p) {
    const std::string fragment = chinese_fragment(p);
    task.fragments.push_back(fragment);
    task.chinese.add_prior({BrailleFragment::parse(fragment), syllable_name(spelled[p]), Language::Chinese, 1});
  }
  for (std::size_t j = 0; j < config.english_fragments; ++j) {
    const std::string fragment = english_fragment(j);
    task.fragments.push_back(fragment);
    task.english.add_prior({BrailleFragment::parse(fragment), "w" + two_digits(j), Language::English, 1});
  }

  auto chinese_example = [&](std::size_t p) { return ToyExample{{chinese_fragment(p)}, {syllable_class[p]}}; };
  std::vector<std::size_t> order(config.syllables);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = config.syllables; i < config.train_pairs; ++i) order.push_back(rng.index(config.syllables));
  rng.shuffle(std::span<std::size_t>(order));
  for (std::size_t p : order) task.train_chinese.push_back(chinese_example(p));
  for (std::size_t i = 0; i < config.held_out_pairs; ++i) task.held_out.push_back(chinese_example(rng.index(config.syllables)));
  if (config.english_fragments > 0) {
    for (std::size_t i = 0; i < config.english_pairs; ++i) {
      const std::size_t j = rng.index(config.english_fragments);
      task.train_english.push_back({{english_fragment(j)}, {word_class[j]}});
    }
  }
  return task;
}

}  // namespace braillekit
