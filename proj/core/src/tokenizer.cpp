#include "braillekit/tokenizer.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "braillekit/text_util.hpp"

namespace braillekit {
namespace {

struct SplitScore {
  std::size_t covered = 0;
  std::size_t tokens = 0;
};

bool better(const SplitScore& a, const SplitScore& b) {
  if (a.covered != b.covered) return a.covered > b.covered;
  return a.tokens < b.tokens;
}

}  // namespace

std::string TokenizedSequence::reconstruct() const {
  std::string out;
  std::size_t next_boundary = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (next_boundary < word_boundaries.size() && word_boundaries[next_boundary] == i) {
      out.push_back(kWordSeparator);
      ++next_boundary;
    }
    out += tokens[i].fragment;
  }
  return out;
}

std::string TokenizedSequence::render_tokens() const {
  std::string out;
  for (const Token& token : tokens) out += "<|" + token.fragment + "|>";
  return out;
}

std::string TokenizedSequence::to_jsonl() const {
  std::string out;
  for (const Token& token : tokens) {
    nlohmann::json line = {{"fragment", token.fragment},
                           {"counterpart", token.counterpart ? nlohmann::json(*token.counterpart) : nullptr},
                           {"start", token.start},
                           {"end", token.end}};
    out += line.dump() + "\n";
  }
  return out;
}

std::vector<std::string> segment_word(std::string_view word, const KnowledgeBase& kb) {
  const std::size_t n = word.size();
  // best[i]: optimal split of word[i..n). Filling right to left and preferring
  // the longer first token on ties yields the leftmost-longest optimum.
  std::vector<SplitScore> best(n + 1);
  std::vector<std::size_t> choice(n + 1, 0);
  const std::size_t longest = std::max<std::size_t>(1, kb.max_fragment_length());
  for (std::size_t i = n; i-- > 0;) {
    bool have = false;
    for (std::size_t len = std::min(longest, n - i); len >= 1; --len) {
      const bool in_kb = kb.contains(word.substr(i, len));
      if (!in_kb && len > 1) continue;
      SplitScore candidate{best[i + len].covered + (in_kb ? len : 0), best[i + len].tokens + 1};
      if (!have || better(candidate, best[i])) {
        best[i] = candidate;
        choice[i] = len;
        have = true;
      }
    }
  }
  std::vector<std::string> pieces;
  for (std::size_t i = 0; i < n; i += choice[i]) pieces.emplace_back(word.substr(i, choice[i]));
  return pieces;
}

TokenizedSequence segment(const BrailleSequence& sequence, const KnowledgeBase& kb) {
  TokenizedSequence result;
  std::size_t offset = 0;
  bool first_word = true;
  for (std::string_view word : sequence.words()) {
    if (!first_word) result.word_boundaries.push_back(result.tokens.size());
    first_word = false;
    for (std::string& piece : segment_word(word, kb)) {
      Token token;
      token.start = offset;
      token.end = offset + piece.size();
      offset = token.end;
      const auto counterparts = kb.lookup(piece);
      if (!counterparts.empty()) token.counterpart = counterparts.front();
      token.fragment = std::move(piece);
      result.tokens.push_back(std::move(token));
    }
    ++offset;  // separator
  }
  return result;
}

std::vector<std::string> map_counterparts(const TokenizedSequence& tokens, const KnowledgeBase& kb) {
  std::vector<std::string> out;
  out.reserve(tokens.tokens.size());
  for (const Token& token : tokens.tokens) {
    const auto counterparts = kb.lookup(token.fragment);
    out.push_back(counterparts.empty() ? std::string(kOovCounterpart) : counterparts.front());
  }
  return out;
}

namespace {

struct WordScore {
  std::size_t covered = 0;
  double log_frequency = 0.0;
  std::size_t words = 0;
};

bool better(const WordScore& a, const WordScore& b) {
  if (a.covered != b.covered) return a.covered > b.covered;
  if (a.log_frequency != b.log_frequency) return a.log_frequency > b.log_frequency;
  return a.words < b.words;
}

std::vector<std::string> split_chunk(std::string_view chunk, const KnowledgeBase& kb) {
  const std::size_t n = chunk.size();
  std::vector<WordScore> best(n + 1);
  std::vector<std::size_t> choice(n + 1, 0);
  std::vector<bool> is_word(n + 1, false);
  for (std::size_t i = n; i-- > 0;) {
    // A single residue cell.
    best[i] = best[i + 1];
    choice[i] = 1;
    is_word[i] = false;
    const std::size_t longest = std::min(kb.max_word_length(), n - i);
    for (std::size_t len = longest; len >= 1; --len) {
      const WordEntry* word = kb.find_word(chunk.substr(i, len));
      if (word == nullptr) continue;
      WordScore candidate{best[i + len].covered + len,
                          best[i + len].log_frequency + std::log1p(static_cast<double>(word->frequency)),
                          best[i + len].words + 1};
      if (better(candidate, best[i])) {
        best[i] = candidate;
        choice[i] = len;
        is_word[i] = true;
      }
    }
  }
  std::vector<std::string> pieces;
  std::string residue;
  for (std::size_t i = 0; i < n; i += choice[i]) {
    if (is_word[i]) {
      if (!residue.empty()) pieces.push_back(std::move(residue));
      residue.clear();
      pieces.emplace_back(chunk.substr(i, choice[i]));
    } else {
      residue.push_back(chunk[i]);
    }
  }
  if (!residue.empty()) pieces.push_back(std::move(residue));
  return pieces;
}

}  // namespace

BrailleSequence word_segment(std::string_view text, const KnowledgeBase& kb) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_braille_ascii(text[i])) {
      throw PositionedError("InvalidChar", i, "invalid Braille ASCII character at position " + std::to_string(i));
    }
  }
  std::vector<std::string> words;
  for (std::string_view chunk : split_whitespace(text)) {
    for (std::string& piece : split_chunk(chunk, kb)) words.push_back(std::move(piece));
  }
  return BrailleSequence::from_words(words);
}

}  // namespace braillekit
