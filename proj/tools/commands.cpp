#include "commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "braillekit/augment.hpp"
#include "braillekit/bkft.hpp"
#include "braillekit/braille.hpp"
#include "braillekit/dataset.hpp"
#include "braillekit/error.hpp"
#include "braillekit/knowledge_base.hpp"
#include "braillekit/metrics.hpp"
#include "braillekit/rng.hpp"
#include "braillekit/synthetic.hpp"
#include "braillekit/text_util.hpp"
#include "braillekit/tokenizer.hpp"
#include "braillekit/toy_train.hpp"
#include "braillekit/transcribe.hpp"
#include "json.hpp"

namespace braillekit::cli {

bool g_data_problems = false;

std::filesystem::path Globals::resolve(const std::string& explicit_path, const char* default_relative) const {
  return explicit_path.empty() ? data_dir / default_relative : std::filesystem::path(explicit_path);
}

namespace {

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error("IoError", "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

// Positional arguments, or standard input line by line.
std::vector<std::string> inputs(const std::vector<std::string>& positional) {
  if (!positional.empty()) return positional;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

KnowledgeBase load_kb(const Globals& g, Language language) {
  return language == Language::Chinese ? KnowledgeBase::load(g.resolve(g.kb_zh, "kb/zh_prior.tsv"), language)
                                       : KnowledgeBase::load(g.resolve(g.kb_en, "kb/en_prior.tsv"), language);
}

KnowledgeBase load_attribute_kb(const Globals& g) {
  KnowledgeBase kb(Language::Chinese);
  kb.load_attributes(g.resolve(g.attributes, "kb/attributes.tsv"));
  return kb;
}

void report_kb_error(const KbLoadError& e) {
  for (const RowError& row : e.rows()) std::cerr << "  line " << row.line << ": " << row.kind << ": " << row.reason << "\n";
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("Digest", "SHA-256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> seeds;
  for (std::string_view part : split(list, ',')) {
    const std::string_view item = trim(part);
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string_view::npos && dash > 0) {
        const auto first = std::stoull(std::string(item.substr(0, dash)));
        const auto last = std::stoull(std::string(item.substr(dash + 1)));
        for (auto s = first; s <= last; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(std::string(item)));
      }
    } catch (const std::logic_error&) {
      throw Error("InvalidArgument", "bad seed list '" + list + "'");
    }
  }
  if (seeds.empty()) throw Error("InvalidArgument", "no seeds given");
  return seeds;
}

// Runs `work(i)` for i in [0, n) on up to `jobs` threads.
template <typename Work>
void parallel_for(std::size_t n, unsigned jobs, Work work) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
  std::vector<std::exception_ptr> failures(n);
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        work(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

}  // namespace

std::string version_text(const Globals& g) {
  std::string text = std::string("braillekit ") + BRAILLEKIT_VERSION + "\n";
  text += "table sha256 " + sha256_hex(kBrailleAscii) + "\n";
  const auto rules = g.resolve(g.rules, "rules/math_braille.tsv");
  try {
    text += "rules sha256 " + sha256_hex(read_file(rules)) + " " + rules.string();
  } catch (const Error&) {
    text += "rules unavailable " + rules.string();
  }
  return text;
}

void add_codec(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("codec", "Convert between Braille ASCII and Unicode Braille");
  struct Opts {
    bool to_unicode = false;
    bool to_ascii = false;
    std::vector<std::string> text;
  };
  auto opts = std::make_shared<Opts>();
  auto* u = cmd->add_flag("--to-unicode", opts->to_unicode, "Braille ASCII to Unicode");
  auto* a = cmd->add_flag("--to-ascii", opts->to_ascii, "Unicode to Braille ASCII");
  u->excludes(a);
  cmd->add_option("text", opts->text, "Strings to convert (default: standard input lines)");
  cmd->callback([opts, &g] {
    Output out(g.out);
    for (const std::string& line : inputs(opts->text)) {
      bool to_ascii = opts->to_ascii;
      if (!opts->to_unicode && !opts->to_ascii) {
        const std::u32string cps = decode_utf8(line);
        to_ascii = !cps.empty() && std::all_of(cps.begin(), cps.end(), [](char32_t c) { return c >= 0x2800 && c <= 0x283F; });
      }
      out.stream() << (to_ascii ? unicode_to_ascii(line) : ascii_to_unicode(line)) << "\n";
    }
  });
}

void add_validate(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("validate", "Check corpus files (JSONL) or raw Braille strings");
  struct Opts {
    std::vector<std::string> files;
    std::vector<std::string> braille;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("files", opts->files, "Corpus JSONL files")->check(CLI::ExistingFile);
  cmd->add_option("--braille", opts->braille, "Braille ASCII strings to check");
  cmd->callback([opts, &g] {
    Output out(g.out);
    std::size_t checked = 0;
    std::size_t problems = 0;
    for (const std::string& text : opts->braille) {
      ++checked;
      for (const InvalidChar& bad : validate(text).issues) {
        ++problems;
        std::string ch;
        append_utf8(ch, bad.character);
        out.stream() << nlohmann::json{{"input", text}, {"position", bad.position}, {"kind", "InvalidChar"}, {"character", ch}}.dump()
                     << "\n";
      }
    }
    for (const std::string& file : opts->files) {
      const std::vector<std::string> lines = read_lines(file);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        ++checked;
        nlohmann::json issues = nlohmann::json::array();
        std::string id;
        try {
          const ParallelExample example = example_from_json(lines[i]);
          id = example.id;
          for (const Issue& issue : validate_example(example)) {
            issues.push_back({{"kind", std::string(to_string(issue.kind))}, {"detail", issue.detail}});
          }
        } catch (const Error& e) {
          issues.push_back({{"kind", e.kind()}, {"detail", e.what()}});
        }
        if (!issues.empty()) {
          problems += issues.size();
          out.stream() << nlohmann::json{{"file", file}, {"line", i + 1}, {"id", id}, {"issues", issues}}.dump() << "\n";
        }
      }
    }
    std::cerr << checked << " checked, " << problems << " issues\n";
    if (problems > 0) g_data_problems = true;
  });
}

void add_perturb(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("perturb", "Simulate writing errors by flipping dots");
  struct Opts {
    double rate = 0.05;
    std::vector<std::string> text;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--rate", opts->rate, "Per-dot flip probability")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("text", opts->text, "Braille ASCII sequences (default: standard input lines)");
  cmd->callback([opts, &g] {
    Output out(g.out);
    const auto lines = inputs(opts->text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      out.stream() << perturb_dots(BrailleSequence::parse(lines[i]), opts->rate, derive_seed(g.seed, i)).str() << "\n";
    }
  });
}

void add_tokenize(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("tokenize", "Split Braille into knowledge-base fragments");
  struct Opts {
    std::string lang = "zh";
    std::string format = "tokens";
    std::vector<std::string> text;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--lang", opts->lang, "zh or en")->check(CLI::IsMember({"zh", "en"}));
  cmd->add_option("--format", opts->format, "tokens, jsonl or counterparts")
      ->check(CLI::IsMember({"tokens", "jsonl", "counterparts"}));
  cmd->add_option("text", opts->text, "Braille ASCII sequences (default: standard input lines)");
  cmd->callback([opts, &g] {
    const KnowledgeBase kb = load_kb(g, parse_language(opts->lang));
    Output out(g.out);
    for (const std::string& line : inputs(opts->text)) {
      const TokenizedSequence tokens = segment(BrailleSequence::parse(line), kb);
      if (opts->format == "tokens") out.stream() << tokens.render_tokens() << "\n";
      else if (opts->format == "jsonl") out.stream() << tokens.to_jsonl();
      else out.stream() << join(map_counterparts(tokens, kb), " ") << "\n";
    }
  });
}

void add_wordseg(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("wordseg", "Insert word separators using the word inventory");
  auto text = std::make_shared<std::vector<std::string>>();
  cmd->add_option("text", *text, "Braille ASCII sequences (default: standard input lines)");
  cmd->callback([text, &g] {
    KnowledgeBase kb = load_kb(g, Language::Chinese);
    kb.load_words(g.resolve(g.words, "kb/words.tsv"));
    Output out(g.out);
    for (const std::string& line : inputs(*text)) out.stream() << word_segment(line, kb).str() << "\n";
  });
}

void add_kb(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("kb", "Query or check the knowledge bases");
  struct Opts {
    std::string lang = "zh";
    std::string action;
    std::vector<std::string> args;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--lang", opts->lang, "zh or en")->check(CLI::IsMember({"zh", "en"}));
  cmd->add_option("action", opts->action, "lookup FRAGMENT | inverse COUNTERPART | similarity A B | group ATTRIBUTE | check")
      ->required()
      ->check(CLI::IsMember({"lookup", "inverse", "similarity", "group", "check"}));
  cmd->add_option("args", opts->args, "Arguments of the action");
  cmd->callback([opts, &g] {
    Output out(g.out);
    auto need = [&](std::size_t n) {
      if (opts->args.size() != n) {
        throw CLI::ValidationError("kb " + opts->action, "expects " + std::to_string(n) + " argument(s)");
      }
    };
    if (opts->action == "check") {
      std::size_t failures = 0;
      auto attempt = [&](const char* what, auto load) {
        try {
          out.stream() << what << ": " << load() << " entries\n";
        } catch (const KbLoadError& e) {
          ++failures;
          std::cerr << what << ": " << e.what() << "\n";
          report_kb_error(e);
        }
      };
      attempt("zh priors", [&] { return load_kb(g, Language::Chinese).entries().size(); });
      attempt("en priors", [&] { return load_kb(g, Language::English).entries().size(); });
      attempt("attributes", [&] { return load_attribute_kb(g).attribute_entries().size(); });
      attempt("words", [&] {
        KnowledgeBase kb(Language::Chinese);
        kb.load_words(g.resolve(g.words, "kb/words.tsv"));
        return kb.words().size();
      });
      attempt("char readings", [&] { return CharPinyinTable::load(g.resolve(g.char_pinyin, "kb/char_pinyin.tsv")).size(); });
      if (failures > 0) g_data_problems = true;
      return;
    }
    if (opts->action == "similarity") {
      need(2);
      out.stream() << similarity(opts->args[0], opts->args[1]) << "\n";
      return;
    }
    need(1);
    if (opts->action == "group") {
      for (const AttributeEntry* e : load_attribute_kb(g).attribute_group(opts->args[0])) {
        out.stream() << e->fragment.str() << "\t" << e->text << "\n";
      }
      return;
    }
    const KnowledgeBase kb = load_kb(g, parse_language(opts->lang));
    const auto results = opts->action == "lookup" ? kb.lookup(opts->args[0]) : kb.inverse_lookup(opts->args[0]);
    for (const std::string& r : results) out.stream() << r << "\n";
    if (results.empty()) std::cerr << "no entries\n";
  });
}

void add_init_embed(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("init-embed", "Extend an embedding table with Braille tokens and initialise them");
  struct Opts {
    std::string embeddings;
    std::string out_stem;
    std::string fragments;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--embeddings", opts->embeddings, "Input table (stem or .json header)")->required();
  cmd->add_option("--out-stem", opts->out_stem, "Output stem for .json and .bin")->required();
  cmd->add_option("--fragments", opts->fragments, "One fragment per line (default: every knowledge-base fragment)")
      ->check(CLI::ExistingFile);
  cmd->callback([opts, &g] {
    VocabEmbedding model = load_embeddings(opts->embeddings);
    const KnowledgeBase kc = load_kb(g, Language::Chinese);
    const KnowledgeBase ke = load_kb(g, Language::English);
    const CharPinyinTable readings = CharPinyinTable::load(g.resolve(g.char_pinyin, "kb/char_pinyin.tsv"));
    std::vector<std::string> fragments;
    if (!opts->fragments.empty()) {
      for (const std::string& line : read_lines(opts->fragments)) {
        if (!trim(line).empty()) fragments.emplace_back(trim(line));
      }
    } else {
      for (const KnowledgeBase* kb : {&kc, &ke}) {
        for (const PriorEntry& e : kb->entries()) {
          if (std::find(fragments.begin(), fragments.end(), e.fragment.str()) == fragments.end()) {
            fragments.push_back(e.fragment.str());
          }
        }
      }
    }
    model = extend_vocab(std::move(model), fragments);
    const SyllableTokenMap syllables = SyllableTokenMap::build(model.vocab, readings);
    const InitReport report = init_all(model, kc, ke, syllables);
    save_embeddings(model, opts->out_stem);
    nlohmann::json skipped = nlohmann::json::array();
    for (const SkippedToken& s : report.skipped) skipped.push_back({{"token", s.token}, {"reason", s.reason}});
    Output out(g.out);
    out.stream() << nlohmann::json{{"added", fragments.size()},
                                   {"chinese_inited", report.chinese_inited},
                                   {"english_inited", report.english_inited},
                                   {"skipped", skipped}}
                        .dump(2)
                 << "\n";
  });
}

void add_augment(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("augment", "Syntax-tree span replacement, or the noise and random-fragment baselines");
  struct Opts {
    std::string input;
    std::string mode = "syntax";
    std::size_t k = 1;
    double min_sim = 0.0;
    double rate = 0.15;
    std::size_t copies = 1;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--input", opts->input, "Annotated JSONL (syntax) or corpus JSONL (noise, replace)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--mode", opts->mode, "syntax, noise or replace")->check(CLI::IsMember({"syntax", "noise", "replace"}));
  cmd->add_option("--k", opts->k, "Spans replaced per output (syntax)")->check(CLI::PositiveNumber);
  cmd->add_option("--min-sim", opts->min_sim, "Minimum fragment similarity (syntax)")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--rate", opts->rate, "Share of aligned pairs touched (noise, replace)");
  cmd->add_option("--copies", opts->copies, "Outputs per input example (syntax)")->check(CLI::PositiveNumber);
  cmd->callback([opts, &g] {
    Output out(g.out);
    if (opts->mode == "syntax") {
      const KnowledgeBase kb = load_attribute_kb(g);
      const auto corpus = read_annotated(opts->input);
      const std::size_t n = corpus.size() * opts->copies;
      std::vector<std::string> lines(n);
      std::vector<std::string> failures(n);
      parallel_for(n, g.jobs, [&](std::size_t i) {
        try {
          lines[i] = annotated_to_json(augment(corpus[i / opts->copies], kb, opts->k, opts->min_sim, derive_seed(g.seed, i)));
        } catch (const Error& e) {
          if (e.kind() != "InsufficientCandidates") throw;
          failures[i] = e.what();
        }
      });
      std::size_t skipped = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!failures[i].empty()) {
          ++skipped;
          if (i % opts->copies == 0) {
            std::cerr << "skipped example " << i / opts->copies << ": InsufficientCandidates: " << failures[i] << "\n";
          }
          continue;
        }
        out.stream() << lines[i] << "\n";
      }
      std::cerr << (n - skipped) << " augmented, " << skipped << " skipped\n";
      return;
    }
    const auto corpus = read_corpus(opts->input);
    NoiseStats stats;
    const auto result = opts->mode == "noise" ? noise_inject(corpus, opts->rate, g.seed, &stats)
                                              : fragment_replace(corpus, load_kb(g, Language::Chinese), opts->rate, g.seed, &stats);
    for (const ParallelExample& example : result) out.stream() << example_to_json(example) << "\n";
    std::cerr << stats.selected << " pairs selected (" << stats.deleted << " deleted, " << stats.duplicated
              << " duplicated, " << stats.replaced << " replaced)\n";
  });
}

void add_transcribe(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("transcribe", "Rule-based transcription of prose and $...$ math into Braille ASCII");
  struct Opts {
    std::string pinyin;
    std::vector<std::string> text;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--pinyin", opts->pinyin, "Per-word Pinyin for a single input, e.g. \"gu4 da2an4 wei2\"");
  cmd->add_option("text", opts->text, "Texts (default: standard input lines)");
  cmd->callback([opts, &g] {
    const RuleSet rules = RuleSet::load(g.resolve(g.rules, "rules/math_braille.tsv"));
    const KnowledgeBase kc = load_kb(g, Language::Chinese);
    const KnowledgeBase ke = load_kb(g, Language::English);
    const CharPinyinTable readings = CharPinyinTable::load(g.resolve(g.char_pinyin, "kb/char_pinyin.tsv"));
    const TranscribeContext context{&rules, &kc, &ke, &readings};
    const auto lines = inputs(opts->text);
    std::vector<std::string> pinyin;
    for (std::string_view word : split_whitespace(opts->pinyin)) pinyin.emplace_back(word);
    if (!pinyin.empty() && lines.size() != 1) {
      throw CLI::ValidationError("--pinyin", "applies to exactly one input text");
    }
    Output out(g.out);
    for (const std::string& line : lines) {
      out.stream() << transcribe_mixed(normalize(line), context, pinyin).str() << "\n";
    }
  });
}

void add_render(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("render", "Render instruction records from a corpus and templates");
  struct Opts {
    std::string corpus;
    std::string direction = "b2t";
    bool all = false;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--corpus", opts->corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  cmd->add_option("--direction", opts->direction, "b2t (braille-to-text) or t2b (text-to-braille)");
  cmd->add_flag("--all", opts->all, "Every template for every example instead of one seeded pick");
  cmd->callback([opts, &g] {
    const auto templates = load_templates(g.resolve(g.templates, "templates/instructions.txt"));
    if (templates.empty()) throw Error("EmptyTemplates", "no templates found");
    const Direction direction = parse_direction(opts->direction);
    const auto corpus = read_corpus(opts->corpus);
    Output out(g.out);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (opts->all) {
        for (const auto& t : templates) out.stream() << record_to_json(render_instruction(t, corpus[i], direction)) << "\n";
      } else {
        Rng rng(derive_seed(g.seed, i));
        out.stream() << record_to_json(render_instruction(templates[rng.index(templates.size())], corpus[i], direction))
                     << "\n";
      }
    }
  });
}

void add_eval(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("eval", "Score hypotheses against references (one segment per line)");
  struct Opts {
    std::string hyp;
    std::string ref;
    std::string tokenize = "intl";
    std::string metrics = "bleu,chrf,cer,ter";
    bool sentence_bleu = false;
    bool no_shifts = false;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--hyp", opts->hyp, "Hypothesis file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--ref", opts->ref, "Reference file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--tokenize", opts->tokenize, "char, whitespace or intl")
      ->check(CLI::IsMember({"char", "whitespace", "none", "intl"}));
  cmd->add_option("--metrics", opts->metrics, "Comma list of bleu, chrf, cer, ter");
  cmd->add_flag("--sentence-bleu", opts->sentence_bleu, "Also report BLEU per pair");
  cmd->add_flag("--no-ter-shifts", opts->no_shifts, "Edit-only TER");
  cmd->callback([opts, &g] {
    MetricConfig config;
    select_metrics(config, opts->metrics);
    config.tokenize = parse_tokenize(opts->tokenize);
    config.sentence_bleu = opts->sentence_bleu;
    config.ter_shifts = !opts->no_shifts;
    config.jobs = g.jobs;
    const MetricReport report = evaluate(read_lines(opts->hyp), read_lines(opts->ref), config);
    Output out(g.out);
    out.stream() << to_json(report) << "\n";
  });
}

void add_train(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("train", "Compare knowledge-based and random embedding initialisation");
  struct Opts {
    std::string corpus_zh;
    std::string corpus_en;
    std::string held_out;
    std::string embeddings;
    bool synthetic = false;
    bool shuffled_kb = false;
    std::string init = "both";
    std::string seeds = "1-5";
    TrainConfig config;
    std::string report;
  };
  auto opts = std::make_shared<Opts>();
  opts->config.learning_rate = 1e-4;
  cmd->add_option("--corpus-zh", opts->corpus_zh, "Aligned Chinese corpus JSONL")->check(CLI::ExistingFile);
  cmd->add_option("--corpus-en", opts->corpus_en, "Aligned English corpus JSONL")->check(CLI::ExistingFile);
  cmd->add_option("--held-out", opts->held_out, "Aligned evaluation corpus JSONL")->check(CLI::ExistingFile);
  cmd->add_option("--embeddings", opts->embeddings, "Pretrained text-token embeddings (stem)");
  cmd->add_flag("--synthetic", opts->synthetic, "Use the built-in synthetic homophone task (one task per seed)");
  cmd->add_flag("--shuffled-kb", opts->shuffled_kb, "Synthetic task with a permuted Chinese knowledge base");
  cmd->add_option("--init", opts->init, "bkft, random or both")->check(CLI::IsMember({"bkft", "random", "both"}));
  cmd->add_option("--seeds", opts->seeds, "Seed list, e.g. 1,2,3 or 1-5");
  cmd->add_option("--epochs", opts->config.epochs, "Epochs per run")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", opts->config.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", opts->config.batch_size, "Pairs per batch")->check(CLI::PositiveNumber);
  cmd->add_option("--max-seq-len", opts->config.max_seq_len, "Positions used per pair")->check(CLI::PositiveNumber);
  cmd->add_option("--momentum", opts->config.momentum, "Heavy-ball momentum in [0, 1)");
  cmd->add_flag("--full-batch", opts->config.full_batch, "One batch per corpus per epoch");
  cmd->add_option("--report", opts->report, "Write the JSON report here");
  cmd->callback([opts, &g] {
    const auto seeds = parse_seeds(opts->seeds);
    TaskFactory factory;
    if (opts->synthetic) {
      const bool shuffled = opts->shuffled_kb;
      factory = [shuffled](std::uint64_t seed) {
        SyntheticConfig sc;
        sc.seed = seed;
        sc.shuffled_kb = shuffled;
        return make_synthetic_task(sc);
      };
    } else {
      if (opts->corpus_zh.empty() && opts->corpus_en.empty()) {
        throw CLI::ValidationError("train", "needs --synthetic or at least one of --corpus-zh/--corpus-en");
      }
      if (opts->embeddings.empty()) throw CLI::ValidationError("train", "corpus training needs --embeddings");
      auto task = std::make_shared<ToyTask>(task_from_corpora(
          opts->corpus_zh.empty() ? std::vector<ParallelExample>{} : read_corpus(opts->corpus_zh),
          opts->corpus_en.empty() ? std::vector<ParallelExample>{} : read_corpus(opts->corpus_en),
          opts->held_out.empty() ? std::vector<ParallelExample>{} : read_corpus(opts->held_out),
          load_embeddings(opts->embeddings), load_kb(g, Language::Chinese), load_kb(g, Language::English),
          CharPinyinTable::load(g.resolve(g.char_pinyin, "kb/char_pinyin.tsv"))));
      factory = [task](std::uint64_t) { return *task; };
    }

    ExperimentReport report;
    TrainConfig bkft = opts->config;
    bkft.init_mode = InitMode::Bkft;
    TrainConfig random = opts->config;
    random.init_mode = InitMode::Random;
    if (opts->init == "both") {
      report = run_experiment(factory, bkft, random, seeds, g.jobs);
    } else {
      TrainConfig config = opts->init == "bkft" ? bkft : random;
      ArmReport& arm = opts->init == "bkft" ? report.bkft : report.random;
      arm.mode = config.init_mode;
      arm.runs.resize(seeds.size());
      parallel_for(seeds.size(), g.jobs, [&](std::size_t i) {
        TrainConfig c = config;
        c.seed = seeds[i];
        arm.runs[i] = train_arm(factory(seeds[i]), c);
      });
      summarise_arm(arm);
      report.config = config;
      report.seeds = seeds;
    }
    const std::string json = to_json(report);
    if (!opts->report.empty()) {
      std::ofstream file(opts->report);
      if (!file) throw Error("IoError", "cannot write " + opts->report);
      file << json << "\n";
    }
    Output out(g.out);
    for (const ArmReport* arm : {&report.bkft, &report.random}) {
      if (arm->runs.empty()) continue;
      out.stream() << to_string(arm->mode) << ": median epochs to " << opts->config.target_accuracy * 100
                   << "% accuracy = " << arm->median_epochs_to_target
                   << ", median final accuracy = " << arm->median_final_accuracy << "\n";
    }
  });
}

void add_ingest(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("ingest", "Normalise, deduplicate and validate corpus files");
  struct Opts {
    std::vector<std::string> files;
    bool strict = false;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("files", opts->files, "Corpus JSONL files")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--strict", opts->strict, "Fail (exit 2) when any example is dropped as invalid");
  cmd->callback([opts, &g] {
    std::vector<ParallelExample> corpus;
    for (const std::string& file : opts->files) {
      for (ParallelExample& example : read_corpus(file)) corpus.push_back(std::move(example));
    }
    std::vector<ParallelExample> normalised(corpus.size());
    parallel_for(corpus.size(), g.jobs, [&](std::size_t i) {
      normalised[i] = corpus[i];
      const std::string text = normalize(corpus[i].text);
      // Offsets only survive when normalisation left the text alone.
      if (text != corpus[i].text) normalised[i].alignment.clear();
      normalised[i].text = text;
    });
    const auto unique = dedup(normalised);
    Output out(g.out);
    std::size_t dropped = 0;
    for (const ParallelExample& example : unique) {
      const auto issues = validate_example(example);
      if (!issues.empty()) {
        ++dropped;
        std::cerr << "dropped " << example.id << ": " << to_string(issues.front().kind) << " " << issues.front().detail
                  << "\n";
        continue;
      }
      out.stream() << example_to_json(example) << "\n";
    }
    std::cerr << corpus.size() << " read, " << corpus.size() - unique.size() << " duplicates, " << dropped
              << " invalid\n";
    if (opts->strict && dropped > 0) g_data_problems = true;
  });
}

}  // namespace braillekit::cli
