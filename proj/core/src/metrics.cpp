#include "braillekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "braillekit/error.hpp"
#include "braillekit/text_util.hpp"
#include "json.hpp"

namespace braillekit {

Tokenize parse_tokenize(std::string_view name) {
  if (name == "char") return Tokenize::Char;
  if (name == "whitespace" || name == "none") return Tokenize::Whitespace;
  if (name == "intl") return Tokenize::Intl;
  throw Error("InvalidArgument", "unknown tokenization '" + std::string(name) + "'");
}

std::string_view to_string(Tokenize mode) noexcept {
  switch (mode) {
    case Tokenize::Char: return "char";
    case Tokenize::Whitespace: return "whitespace";
    case Tokenize::Intl: return "intl";
  }
  return "intl";
}

std::vector<std::string> tokenize(std::string_view text, Tokenize mode) {
  std::vector<std::string> tokens;
  if (mode == Tokenize::Whitespace) {
    for (std::string_view word : split_whitespace(text)) tokens.emplace_back(word);
    return tokens;
  }
  const std::u32string cps = decode_utf8(text);
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (is_unicode_space(c)) {
      flush();
      continue;
    }
    if (mode == Tokenize::Char) {
      std::string one;
      append_utf8(one, c);
      tokens.push_back(std::move(one));
      continue;
    }
    const bool between_digits =
        i > 0 && i + 1 < cps.size() && is_unicode_digit(cps[i - 1]) && is_unicode_digit(cps[i + 1]);
    if ((is_unicode_punct(c) && !between_digits) || is_unicode_symbol(c)) {
      flush();
      std::string one;
      append_utf8(one, c);
      tokens.push_back(std::move(one));
      continue;
    }
    append_utf8(current, c);
  }
  flush();
  return tokens;
}

namespace {

template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = std::min({above + 1, row[j - 1] + 1, diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[b.size()];
}

}  // namespace

std::size_t char_edit_distance(std::string_view hyp, std::string_view ref) {
  return levenshtein(decode_utf8(hyp), decode_utf8(ref));
}

double cer(std::string_view hyp, std::string_view ref) {
  const std::u32string r = decode_utf8(ref);
  if (r.empty()) throw Error("EmptyReference", "CER needs a non-empty reference");
  return static_cast<double>(levenshtein(decode_utf8(hyp), r)) / static_cast<double>(r.size());
}

std::size_t token_edit_distance(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  return levenshtein(hyp, ref);
}

double TerStats::score() const noexcept {
  return 100.0 * static_cast<double>(edits + shifts) / static_cast<double>(ref_length);
}

namespace {

std::string phrase_key(const std::vector<std::string>& tokens, std::size_t start, std::size_t length) {
  std::string key;
  for (std::size_t i = start; i < start + length; ++i) {
    key += tokens[i];
    key += '\x1f';
  }
  return key;
}

// Tokens as integer ids; hypothesis tokens absent from the reference share id 0.
std::size_t int_levenshtein(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                            std::vector<std::size_t>& row) {
  row.resize(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = std::min({above + 1, row[j - 1] + 1, diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[b.size()];
}

}  // namespace

TerStats ter_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, bool shifts,
                   std::size_t max_shift) {
  TerStats stats;
  stats.ref_length = ref.size();
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> r;
  for (const auto& t : ref) r.push_back(ids.try_emplace(t, static_cast<std::uint32_t>(ids.size() + 1)).first->second);
  std::vector<std::uint32_t> current;
  for (const auto& t : hyp) {
    const auto it = ids.find(t);
    current.push_back(it == ids.end() ? 0 : it->second);
  }
  std::vector<std::size_t> row;
  std::size_t distance = int_levenshtein(current, r, row);
  if (shifts && max_shift > 0) {
    std::set<std::vector<std::uint32_t>> ref_phrases;
    for (std::size_t start = 0; start < r.size(); ++start) {
      for (std::size_t len = 1; len <= max_shift && start + len <= r.size(); ++len) {
        ref_phrases.emplace(r.begin() + static_cast<std::ptrdiff_t>(start),
                            r.begin() + static_cast<std::ptrdiff_t>(start + len));
      }
    }
    std::vector<std::uint32_t> candidate;
    std::vector<std::uint32_t> phrase;
    std::vector<std::uint32_t> best;
    while (distance > 0) {
      std::size_t best_distance = distance;
      best.clear();
      const std::size_t n = current.size();
      for (std::size_t start = 0; start < n; ++start) {
        for (std::size_t len = std::min(max_shift, n - start); len >= 1; --len) {
          phrase.assign(current.begin() + static_cast<std::ptrdiff_t>(start),
                        current.begin() + static_cast<std::ptrdiff_t>(start + len));
          if (!ref_phrases.count(phrase)) continue;
          for (std::size_t dest = 0; dest + len <= n; ++dest) {
            if (dest == start) continue;
            candidate.clear();
            for (std::size_t i = 0; i < n; ++i) {
              if (i < start || i >= start + len) candidate.push_back(current[i]);
            }
            candidate.insert(candidate.begin() + static_cast<std::ptrdiff_t>(dest), phrase.begin(), phrase.end());
            const std::size_t d = int_levenshtein(candidate, r, row);
            if (d < best_distance) {
              best_distance = d;
              best = candidate;
            }
          }
        }
      }
      // The shift itself costs one edit.
      if (best_distance + 1 > distance || best.empty()) break;
      current.swap(best);
      distance = best_distance;
      ++stats.shifts;
    }
  }
  stats.edits = distance;
  return stats;
}

double ter(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, bool shifts) {
  if (ref.empty()) throw Error("EmptyReference", "TER needs a non-empty reference");
  return ter_stats(hyp, ref, shifts).score();
}

namespace {

using Counts = std::unordered_map<std::string, std::uint64_t>;

Counts ngrams(const std::vector<std::string>& units, std::size_t n) {
  Counts counts;
  if (units.size() < n) return counts;
  for (std::size_t i = 0; i + n <= units.size(); ++i) ++counts[phrase_key(units, i, n)];
  return counts;
}

NgramCounts compare(const Counts& hyp, const Counts& ref) {
  NgramCounts out;
  for (const auto& [gram, count] : hyp) {
    out.hyp += count;
    if (auto it = ref.find(gram); it != ref.end()) out.match += std::min(count, it->second);
  }
  for (const auto& entry : ref) out.ref += entry.second;
  return out;
}

std::vector<std::string> chars_without_space(std::string_view text) {
  std::vector<std::string> out;
  for (char32_t c : decode_utf8(text)) {
    if (is_unicode_space(c)) continue;
    std::string one;
    append_utf8(one, c);
    out.push_back(std::move(one));
  }
  return out;
}

}  // namespace

ChrfStats& ChrfStats::operator+=(const ChrfStats& other) {
  if (orders.size() < other.orders.size()) orders.resize(other.orders.size());
  for (std::size_t i = 0; i < other.orders.size(); ++i) {
    orders[i].hyp += other.orders[i].hyp;
    orders[i].ref += other.orders[i].ref;
    orders[i].match += other.orders[i].match;
  }
  return *this;
}

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, int char_n, int word_n) {
  ChrfStats stats;
  const auto hyp_chars = chars_without_space(hyp);
  const auto ref_chars = chars_without_space(ref);
  for (int n = 1; n <= char_n; ++n) {
    stats.orders.push_back(compare(ngrams(hyp_chars, static_cast<std::size_t>(n)),
                                   ngrams(ref_chars, static_cast<std::size_t>(n))));
  }
  const auto hyp_words = tokenize(hyp, Tokenize::Whitespace);
  const auto ref_words = tokenize(ref, Tokenize::Whitespace);
  for (int n = 1; n <= word_n; ++n) {
    stats.orders.push_back(compare(ngrams(hyp_words, static_cast<std::size_t>(n)),
                                   ngrams(ref_words, static_cast<std::size_t>(n))));
  }
  return stats;
}

double chrf_score(const ChrfStats& stats, double beta) {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t effective = 0;
  bool any_hyp = false;
  bool any_ref = false;
  for (const NgramCounts& order : stats.orders) {
    any_hyp = any_hyp || order.hyp > 0;
    any_ref = any_ref || order.ref > 0;
    if (order.hyp == 0 || order.ref == 0) continue;
    precision += static_cast<double>(order.match) / static_cast<double>(order.hyp);
    recall += static_cast<double>(order.match) / static_cast<double>(order.ref);
    ++effective;
  }
  if (!any_hyp && !any_ref) return 100.0;
  if (effective == 0) return 0.0;
  precision /= static_cast<double>(effective);
  recall /= static_cast<double>(effective);
  if (precision + recall == 0.0) return 0.0;
  const double b2 = beta * beta;
  return 100.0 * (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

double chrf_pp(std::string_view hyp, std::string_view ref, int char_n, int word_n, double beta) {
  return chrf_score(chrf_stats(hyp, ref, char_n, word_n), beta);
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (matches.size() < other.matches.size()) {
    matches.resize(other.matches.size());
    totals.resize(other.totals.size());
  }
  for (std::size_t i = 0; i < other.matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

BleuStats bleu_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, int max_n) {
  BleuStats stats;
  stats.hyp_length = hyp.size();
  stats.ref_length = ref.size();
  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts counts = compare(ngrams(hyp, static_cast<std::size_t>(n)), ngrams(ref, static_cast<std::size_t>(n)));
    stats.matches.push_back(counts.match);
    stats.totals.push_back(counts.hyp);
  }
  return stats;
}

double bleu_score(const BleuStats& stats) {
  if (stats.hyp_length == 0) return stats.ref_length == 0 ? 100.0 : 0.0;
  double log_sum = 0.0;
  std::size_t effective = 0;
  for (std::size_t i = 0; i < stats.totals.size(); ++i) {
    if (stats.totals[i] == 0) continue;
    if (stats.matches[i] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(stats.matches[i]) / static_cast<double>(stats.totals[i]));
    ++effective;
  }
  if (effective == 0) return 0.0;
  const double hyp_len = static_cast<double>(stats.hyp_length);
  const double ref_len = static_cast<double>(stats.ref_length);
  const double brevity = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return 100.0 * brevity * std::exp(log_sum / static_cast<double>(effective));
}

double corpus_bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs, int max_n,
                   Tokenize mode) {
  if (hyps.size() != refs.size()) throw Error("LengthMismatch", "hypothesis and reference counts differ");
  if (hyps.empty()) throw Error("InvalidArgument", "BLEU needs at least one pair");
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += bleu_stats(tokenize(hyps[i], mode), tokenize(refs[i], mode), max_n);
  return bleu_score(total);
}

void select_metrics(MetricConfig& config, std::string_view list) {
  config.bleu = config.chrf = config.cer = config.ter = false;
  for (std::string_view raw : split(list, ',')) {
    const std::string name = to_lower_ascii(trim(raw));
    if (name == "bleu") config.bleu = true;
    else if (name == "chrf" || name == "chrf++") config.chrf = true;
    else if (name == "cer") config.cer = true;
    else if (name == "ter") config.ter = true;
    else throw Error("InvalidArgument", "unknown metric '" + name + "'");
  }
}

namespace {

struct PairStats {
  BleuStats bleu;
  ChrfStats chrf;
  std::size_t char_edits = 0;
  std::size_t ref_chars = 0;
  TerStats ter;
};

PairStats pair_stats(const std::string& hyp, const std::string& ref, const MetricConfig& config, std::size_t index) {
  PairStats stats;
  if (config.bleu) stats.bleu = bleu_stats(tokenize(hyp, config.tokenize), tokenize(ref, config.tokenize), config.max_n);
  if (config.chrf) stats.chrf = chrf_stats(hyp, ref, config.char_n, config.word_n);
  if (config.cer) {
    const std::u32string r = decode_utf8(ref);
    if (r.empty()) throw Error("EmptyReference", "pair " + std::to_string(index) + " has an empty reference");
    stats.char_edits = levenshtein(decode_utf8(hyp), r);
    stats.ref_chars = r.size();
  }
  if (config.ter) {
    const auto ref_tokens = tokenize(ref, config.tokenize);
    if (ref_tokens.empty()) throw Error("EmptyReference", "pair " + std::to_string(index) + " has an empty reference");
    stats.ter = ter_stats(tokenize(hyp, config.tokenize), ref_tokens, config.ter_shifts);
  }
  return stats;
}

}  // namespace

MetricReport evaluate(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                      const MetricConfig& config) {
  if (hyps.size() != refs.size()) throw Error("LengthMismatch", "hypothesis and reference counts differ");
  std::vector<PairStats> stats(hyps.size());
  std::vector<std::exception_ptr> failures(hyps.size());
  const std::size_t jobs = std::max<std::size_t>(1, std::min<std::size_t>(config.jobs, hyps.size()));
  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < hyps.size(); i += jobs) {
      try {
        stats[i] = pair_stats(hyps[i], refs[i], config, i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < jobs; ++w) threads.emplace_back(work, w);
    for (std::thread& t : threads) t.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  MetricReport report;
  report.config = config;
  for (const PairStats& s : stats) {
    PairScores scores;
    if (config.bleu) {
      if (config.sentence_bleu) scores.bleu = bleu_score(s.bleu);
      report.bleu_totals += s.bleu;
    }
    if (config.chrf) {
      scores.chrf = chrf_score(s.chrf, config.beta);
      report.chrf_totals += s.chrf;
    }
    if (config.cer) {
      scores.cer = static_cast<double>(s.char_edits) / static_cast<double>(s.ref_chars);
      report.char_edits += s.char_edits;
      report.ref_chars += s.ref_chars;
    }
    if (config.ter) {
      scores.ter = s.ter.score();
      report.ter_edits += s.ter.edits + s.ter.shifts;
      report.ref_tokens += s.ter.ref_length;
    }
    report.per_pair.push_back(scores);
  }
  if (!hyps.empty()) {
    if (config.bleu) report.corpus.bleu = bleu_score(report.bleu_totals);
    if (config.chrf) report.corpus.chrf = chrf_score(report.chrf_totals, config.beta);
    if (config.cer) report.corpus.cer = static_cast<double>(report.char_edits) / static_cast<double>(report.ref_chars);
    if (config.ter) report.corpus.ter = 100.0 * static_cast<double>(report.ter_edits) / static_cast<double>(report.ref_tokens);
  }
  return report;
}

namespace {

nlohmann::json scores_json(const PairScores& scores) {
  nlohmann::json j = nlohmann::json::object();
  if (scores.bleu) j["bleu"] = *scores.bleu;
  if (scores.chrf) j["chrf"] = *scores.chrf;
  if (scores.cer) j["cer"] = *scores.cer;
  if (scores.ter) j["ter"] = *scores.ter;
  return j;
}

}  // namespace

std::string to_json(const MetricReport& report) {
  nlohmann::json per_pair = nlohmann::json::array();
  for (const PairScores& scores : report.per_pair) per_pair.push_back(scores_json(scores));
  nlohmann::json chrf_orders = nlohmann::json::array();
  for (const NgramCounts& c : report.chrf_totals.orders) chrf_orders.push_back({c.hyp, c.ref, c.match});
  const MetricConfig& c = report.config;
  nlohmann::json j = {
      {"corpus", scores_json(report.corpus)},
      {"per_pair", std::move(per_pair)},
      {"config",
       {{"max_n", c.max_n},
        {"char_n", c.char_n},
        {"word_n", c.word_n},
        {"beta", c.beta},
        {"tokenize", std::string(to_string(c.tokenize))},
        {"ter_shifts", c.ter_shifts}}},
      {"statistics",
       {{"bleu", {{"matches", report.bleu_totals.matches},
                  {"totals", report.bleu_totals.totals},
                  {"hyp_length", report.bleu_totals.hyp_length},
                  {"ref_length", report.bleu_totals.ref_length}}},
        {"chrf_orders", std::move(chrf_orders)},
        {"cer", {{"edits", report.char_edits}, {"ref_chars", report.ref_chars}}},
        {"ter", {{"edits", report.ter_edits}, {"ref_tokens", report.ref_tokens}}}}},
  };
  return j.dump(2);
}

}  // namespace braillekit
