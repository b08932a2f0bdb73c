#pragma once

// Synthetic homophone task for the initialisation experiment.
//
// Each of `syllables` syllables has `homophones` character tokens whose
// embeddings scatter (noise) around a class centre; every Chinese fragment
// spells one syllable and its target is that syllable's class. English
// fragments map to word tokens built the same way.

#include <cstddef>
#include <cstdint>

#include "braillekit/toy_train.hpp"

namespace braillekit {

struct SyntheticConfig {
  std::size_t dim = 16;
  std::size_t classes = 40;
  std::size_t syllables = 200;
  std::size_t homophones = 3;
  double noise = 1.0;
  std::size_t train_pairs = 500;  // every fragment once, the rest drawn uniformly
  std::size_t held_out_pairs = 100;
  std::size_t english_fragments = 40;
  std::size_t english_pairs = 80;
  bool shuffled_kb = false;  // permute the fragment -> syllable map of K_C
  std::uint64_t seed = 0;
};

// Throws Error("InvalidConfig") for empty sizes or more fragments than the
// generator can spell.
ToyTask make_synthetic_task(const SyntheticConfig& config);

}  // namespace braillekit
