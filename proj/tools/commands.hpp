#pragma once

#include <filesystem>
#include <string>

#include "CLI11.hpp"

namespace braillekit::cli {

struct Globals {
  std::filesystem::path data_dir;
  std::string kb_zh;
  std::string kb_en;
  std::string attributes;
  std::string words;
  std::string char_pinyin;
  std::string rules;
  std::string templates;
  std::string out;
  unsigned jobs = 1;
  std::uint64_t seed = 0;

  // An explicit path, or the default file under the data directory.
  std::filesystem::path resolve(const std::string& explicit_path, const char* default_relative) const;
};

// Each adds one subcommand whose callback does the work.
void add_codec(CLI::App& app, Globals& g);
void add_validate(CLI::App& app, Globals& g);
void add_perturb(CLI::App& app, Globals& g);
void add_tokenize(CLI::App& app, Globals& g);
void add_wordseg(CLI::App& app, Globals& g);
void add_kb(CLI::App& app, Globals& g);
void add_init_embed(CLI::App& app, Globals& g);
void add_augment(CLI::App& app, Globals& g);
void add_transcribe(CLI::App& app, Globals& g);
void add_render(CLI::App& app, Globals& g);
void add_eval(CLI::App& app, Globals& g);
void add_train(CLI::App& app, Globals& g);
void add_ingest(CLI::App& app, Globals& g);

// Set by `validate` and `ingest --strict` when the data has problems.
extern bool g_data_problems;

std::string version_text(const Globals& g);

}  // namespace braillekit::cli
