#pragma once

// Reference-based scores: CER, TER, chrF++ and corpus BLEU.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace braillekit {

enum class Tokenize { Char, Whitespace, Intl };

// "char", "whitespace" (or "none"), "intl". Throws Error("InvalidArgument").
Tokenize parse_tokenize(std::string_view name);
std::string_view to_string(Tokenize mode) noexcept;

// char: every non-space code point. whitespace: blank-separated words.
// intl: words with punctuation and symbols split off, except punctuation
// between two digits.
std::vector<std::string> tokenize(std::string_view text, Tokenize mode);

// CER ----------------------------------------------------------------------

std::size_t char_edit_distance(std::string_view hyp, std::string_view ref);
// Levenshtein over code points divided by the reference length. Throws
// Error("EmptyReference").
double cer(std::string_view hyp, std::string_view ref);

// TER ----------------------------------------------------------------------

std::size_t token_edit_distance(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

struct TerStats {
  std::size_t edits = 0;
  std::size_t shifts = 0;
  std::size_t ref_length = 0;
  double score() const noexcept;  // percentage
};

// Greedy block shifts of up to `max_shift` tokens whose phrase occurs in the
// reference; a shift is taken only when it strictly lowers the edit distance
// and costs one edit. `shifts = false` gives the plain edit rate.
TerStats ter_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, bool shifts = true,
                   std::size_t max_shift = 10);
// Throws Error("EmptyReference").
double ter(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, bool shifts = true);

// chrF++ -------------------------------------------------------------------

struct NgramCounts {
  std::uint64_t hyp = 0;
  std::uint64_t ref = 0;
  std::uint64_t match = 0;
};

// Per-order counts: character orders 1..char_n first, then word orders.
struct ChrfStats {
  std::vector<NgramCounts> orders;
  ChrfStats& operator+=(const ChrfStats& other);
};

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, int char_n = 6, int word_n = 2);
// Precision and recall averaged over the orders present on both sides, then
// F-beta, scaled to [0, 100]. No n-grams on either side scores 100; n-grams
// on one side only score 0.
double chrf_score(const ChrfStats& stats, double beta = 2.0);
double chrf_pp(std::string_view hyp, std::string_view ref, int char_n = 6, int word_n = 2, double beta = 2.0);

// BLEU ---------------------------------------------------------------------

struct BleuStats {
  std::vector<std::uint64_t> matches;
  std::vector<std::uint64_t> totals;
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;
  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, int max_n = 4);
// Geometric mean of clipped precisions over orders with hypothesis n-grams,
// times the brevity penalty; no smoothing.
double bleu_score(const BleuStats& stats);
// Throws Error("LengthMismatch") or Error("InvalidArgument") for no pairs.
double corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs, int max_n = 4,
                   Tokenize mode = Tokenize::Intl);

// Reports ------------------------------------------------------------------

struct MetricConfig {
  bool bleu = true;
  bool chrf = true;
  bool cer = true;
  bool ter = true;
  int max_n = 4;
  int char_n = 6;
  int word_n = 2;
  double beta = 2.0;
  Tokenize tokenize = Tokenize::Intl;
  bool ter_shifts = true;
  bool sentence_bleu = false;  // per-pair BLEU
  unsigned jobs = 1;
};

// Parses a comma list such as "bleu,chrf". Throws Error("InvalidArgument").
void select_metrics(MetricConfig& config, std::string_view list);

struct PairScores {
  std::optional<double> bleu;
  std::optional<double> chrf;
  std::optional<double> cer;
  std::optional<double> ter;
};

struct MetricReport {
  std::vector<PairScores> per_pair;
  PairScores corpus;
  MetricConfig config;
  // Sufficient statistics the corpus scores are computed from.
  BleuStats bleu_totals;
  ChrfStats chrf_totals;
  std::uint64_t char_edits = 0;
  std::uint64_t ref_chars = 0;
  std::uint64_t ter_edits = 0;
  std::uint64_t ref_tokens = 0;
};

// Throws Error("LengthMismatch") and Error("EmptyReference") (CER/TER only).
MetricReport evaluate(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                      const MetricConfig& config);
std::string to_json(const MetricReport& report);

}  // namespace braillekit
