#include <cstdlib>
#include <iostream>
#include <thread>

#include "braillekit/error.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace braillekit::cli;
  Globals g;
  if (const char* env = std::getenv("BRAILLEKIT_DATA_DIR")) g.data_dir = env;
  else g.data_dir = BRAILLEKIT_DEFAULT_DATA_DIR;
  g.jobs = std::max(1u, std::thread::hardware_concurrency());

  CLI::App app{"Braille toolkit: codec, tokenization, knowledge-based embedding initialisation, augmentation, "
               "transcription, evaluation and training."};
  app.name("braillekit");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML configuration file (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_version_flag("--version", [&g] { return version_text(g); }, "Print version and data checksums");
  app.option_defaults()->always_capture_default();

  app.add_option("--data-dir", g.data_dir, "Directory holding kb/, rules/, tables/ and templates/");
  app.add_option("--kb-zh", g.kb_zh, "Chinese prior table (default kb/zh_prior.tsv)");
  app.add_option("--kb-en", g.kb_en, "English prior table (default kb/en_prior.tsv)");
  app.add_option("--attributes", g.attributes, "Attribute table (default kb/attributes.tsv)");
  app.add_option("--words", g.words, "Chinese word inventory (default kb/words.tsv)");
  app.add_option("--char-pinyin", g.char_pinyin, "Character readings (default kb/char_pinyin.tsv)");
  app.add_option("--rules", g.rules, "Transcription rules (default rules/math_braille.tsv)");
  app.add_option("--templates", g.templates, "Instruction templates (default templates/instructions.txt)");
  app.add_option("--out", g.out, "Write results here instead of standard output");
  app.add_option("--jobs", g.jobs, "Parallel workers (default: logical cores)")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for randomised subcommands");

  add_codec(app, g);
  add_validate(app, g);
  add_perturb(app, g);
  add_tokenize(app, g);
  add_wordseg(app, g);
  add_kb(app, g);
  add_init_embed(app, g);
  add_augment(app, g);
  add_transcribe(app, g);
  add_render(app, g);
  add_eval(app, g);
  add_train(app, g);
  add_ingest(app, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const braillekit::PositionedError& e) {
    std::cerr << "error: " << e.kind() << " at " << e.position() << ": " << e.what() << "\n";
    return 2;
  } catch (const braillekit::Error& e) {
    std::cerr << "error: " << e.kind() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return g_data_problems ? 2 : 0;
}
