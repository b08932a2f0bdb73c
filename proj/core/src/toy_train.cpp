#include "braillekit/toy_train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "braillekit/error.hpp"
#include "braillekit/rng.hpp"
#include "braillekit/text_util.hpp"
#include "json.hpp"

namespace braillekit {

ToyModel::ToyModel(EmbeddingTable table, std::size_t class_count)
    : embedding(std::move(table)),
      classes(class_count),
      weights(embedding.dim() * class_count, 0.0),
      bias(class_count, 0.0) {}

bool ToyModel::all_finite() const noexcept {
  auto finite = [](double x) { return std::isfinite(x); };
  return embedding.all_finite() && std::all_of(weights.begin(), weights.end(), finite) &&
         std::all_of(bias.begin(), bias.end(), finite);
}

std::vector<double> Gradient::embedding_row(std::size_t row, std::size_t dim) const {
  if (auto it = embedding.find(row); it != embedding.end()) return it->second;
  return std::vector<double>(dim, 0.0);
}

double Gradient::squared_norm() const {
  double total = 0.0;
  for (const auto& [row, values] : embedding) {
    for (double v : values) total += v * v;
  }
  for (double v : weights) total += v * v;
  for (double v : bias) total += v * v;
  return total;
}

namespace {

std::size_t position_count(const ToyModel& model, std::span<const SequencePair> batch, std::size_t max_seq_len) {
  std::size_t positions = 0;
  for (const SequencePair& pair : batch) {
    if (pair.source.size() != pair.target.size()) {
      throw Error("LengthMismatch", "source and target lengths differ");
    }
    const std::size_t n = std::min(pair.source.size(), max_seq_len);
    for (std::size_t t = 0; t < n; ++t) {
      if (pair.source[t] >= model.embedding.rows()) {
        throw Error("InvalidTokenId", "source id " + std::to_string(pair.source[t]) + " is outside the vocabulary");
      }
      if (pair.target[t] >= model.classes) {
        throw Error("InvalidTokenId", "target id " + std::to_string(pair.target[t]) + " is outside the classes");
      }
    }
    positions += n;
  }
  if (positions == 0) throw Error("EmptyBatch", "batch has no positions");
  return positions;
}

// Logits for one source row; returns log-sum-exp and fills `probs` with the softmax.
double logits(const ToyModel& model, std::size_t row, std::vector<double>& z, std::vector<double>& probs) {
  const std::size_t d = model.dim();
  const std::size_t k = model.classes;
  const auto e = model.embedding.row(row);
  z.assign(model.bias.begin(), model.bias.end());
  for (std::size_t i = 0; i < d; ++i) {
    const double ei = e[i];
    const double* w = model.weights.data() + i * k;
    for (std::size_t c = 0; c < k; ++c) z[c] += ei * w[c];
  }
  const double peak = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  probs.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    probs[c] = std::exp(z[c] - peak);
    sum += probs[c];
  }
  for (double& p : probs) p /= sum;
  return peak + std::log(sum);
}

}  // namespace

double forward_nll(const ToyModel& model, std::span<const SequencePair> batch, std::size_t max_seq_len) {
  const std::size_t positions = position_count(model, batch, max_seq_len);
  std::vector<double> z;
  std::vector<double> probs;
  double total = 0.0;
  for (const SequencePair& pair : batch) {
    const std::size_t n = std::min(pair.source.size(), max_seq_len);
    for (std::size_t t = 0; t < n; ++t) {
      const double lse = logits(model, pair.source[t], z, probs);
      total += lse - z[pair.target[t]];
    }
  }
  return total / static_cast<double>(positions);
}

Gradient backward(const ToyModel& model, std::span<const SequencePair> batch, std::size_t max_seq_len) {
  const std::size_t positions = position_count(model, batch, max_seq_len);
  const std::size_t d = model.dim();
  const std::size_t k = model.classes;
  const double scale = 1.0 / static_cast<double>(positions);
  Gradient g;
  g.weights.assign(d * k, 0.0);
  g.bias.assign(k, 0.0);
  std::vector<double> z;
  std::vector<double> dz;
  double total = 0.0;
  for (const SequencePair& pair : batch) {
    const std::size_t n = std::min(pair.source.size(), max_seq_len);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t row = pair.source[t];
      const double lse = logits(model, row, z, dz);
      total += lse - z[pair.target[t]];
      dz[pair.target[t]] -= 1.0;
      for (double& v : dz) v *= scale;
      const auto e = model.embedding.row(row);
      auto& ge = g.embedding[row];
      ge.resize(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) {
        const double* w = model.weights.data() + i * k;
        double* gw = g.weights.data() + i * k;
        double acc = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          gw[c] += e[i] * dz[c];
          acc += w[c] * dz[c];
        }
        ge[i] += acc;
      }
      for (std::size_t c = 0; c < k; ++c) g.bias[c] += dz[c];
    }
  }
  g.loss = total * scale;
  return g;
}

double token_accuracy(const ToyModel& model, std::span<const SequencePair> data, std::size_t max_seq_len) {
  const std::size_t positions = position_count(model, data, max_seq_len);
  std::vector<double> z;
  std::vector<double> probs;
  std::size_t correct = 0;
  for (const SequencePair& pair : data) {
    const std::size_t n = std::min(pair.source.size(), max_seq_len);
    for (std::size_t t = 0; t < n; ++t) {
      logits(model, pair.source[t], z, probs);
      const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
      if (best == pair.target[t]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(positions);
}

std::vector<BatchSource> BatchSchedule::labels() const {
  std::vector<BatchSource> out;
  for (const ScheduledBatch& b : batches) out.push_back(b.source);
  return out;
}

BatchSchedule schedule_batches(std::size_t chinese_batches, std::size_t english_batches, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> c(chinese_batches);
  std::vector<std::size_t> e(english_batches);
  std::iota(c.begin(), c.end(), std::size_t{0});
  std::iota(e.begin(), e.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(c));
  rng.shuffle(std::span<std::size_t>(e));
  BatchSchedule schedule;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < c.size() || j < e.size()) {
    if (i < c.size()) schedule.batches.push_back({BatchSource::Chinese, c[i++]});
    if (j < e.size()) schedule.batches.push_back({BatchSource::English, e[j++]});
  }
  return schedule;
}

std::string_view to_string(InitMode mode) noexcept { return mode == InitMode::Bkft ? "bkft" : "random"; }

InitMode parse_init_mode(std::string_view name) {
  if (name == "bkft") return InitMode::Bkft;
  if (name == "random") return InitMode::Random;
  throw Error("InvalidConfig", "init mode must be bkft or random, not '" + std::string(name) + "'");
}

void check_config(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw Error("InvalidConfig", "learning rate must be positive");
  }
  if (config.max_seq_len == 0) throw Error("InvalidConfig", "max sequence length must be positive");
  if (config.batch_size == 0 && !config.full_batch) throw Error("InvalidConfig", "batch size must be positive");
  if (config.epochs == 0) throw Error("InvalidConfig", "epochs must be positive");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw Error("InvalidConfig", "momentum must lie in [0, 1)");
  if (!(config.weight_init_scale >= 0.0)) throw Error("InvalidConfig", "weight scale must be non-negative");
}

void Optimizer::step(ToyModel& model, const Gradient& gradient) {
  if (momentum == 0.0) {
    for (const auto& [row, values] : gradient.embedding) {
      auto e = model.embedding.row(row);
      for (std::size_t i = 0; i < values.size(); ++i) e[i] -= learning_rate * values[i];
    }
    for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights[i] -= learning_rate * gradient.weights[i];
    for (std::size_t c = 0; c < model.bias.size(); ++c) model.bias[c] -= learning_rate * gradient.bias[c];
    return;
  }
  const std::size_t d = model.dim();
  embedding_velocity_.resize(model.embedding.data().size(), 0.0);
  weight_velocity_.resize(model.weights.size(), 0.0);
  bias_velocity_.resize(model.bias.size(), 0.0);
  // Heavy-ball: every parameter moves by its velocity, including rows the
  // batch did not touch.
  for (double& v : embedding_velocity_) v *= momentum;
  for (const auto& [row, values] : gradient.embedding) {
    for (std::size_t i = 0; i < d; ++i) embedding_velocity_[row * d + i] -= learning_rate * values[i];
  }
  auto data = model.embedding.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += embedding_velocity_[i];
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    weight_velocity_[i] = momentum * weight_velocity_[i] - learning_rate * gradient.weights[i];
    model.weights[i] += weight_velocity_[i];
  }
  for (std::size_t c = 0; c < model.bias.size(); ++c) {
    bias_velocity_[c] = momentum * bias_velocity_[c] - learning_rate * gradient.bias[c];
    model.bias[c] += bias_velocity_[c];
  }
}

ToyTask task_from_corpora(const std::vector<ParallelExample>& chinese, const std::vector<ParallelExample>& english,
                          const std::vector<ParallelExample>& held_out, VocabEmbedding base, KnowledgeBase kc,
                          KnowledgeBase ke, CharPinyinTable char_pinyin) {
  ToyTask task;
  task.base = std::move(base);
  task.chinese = std::move(kc);
  task.english = std::move(ke);
  task.char_pinyin = std::move(char_pinyin);
  std::unordered_map<std::string, std::size_t> classes;
  std::unordered_map<std::string, bool> seen_fragments;
  auto convert = [&](const std::vector<ParallelExample>& corpus, std::vector<ToyExample>& out) {
    for (const ParallelExample& example : corpus) {
      if (example.alignment.empty()) continue;
      const std::u32string text = decode_utf8(example.text);
      ToyExample toy;
      for (const AlignmentPair& pair : example.alignment) {
        std::string fragment;
        for (char c : example.braille.substr(pair.braille_start, pair.braille_end - pair.braille_start)) {
          if (c != kWordSeparator) fragment.push_back(c);
        }
        const std::string unit = encode_utf8(std::u32string_view(text).substr(pair.text_start, pair.text_end - pair.text_start));
        auto [it, added] = classes.emplace(unit, task.class_names.size());
        if (added) task.class_names.push_back(unit);
        if (seen_fragments.emplace(fragment, true).second) task.fragments.push_back(fragment);
        toy.fragments.push_back(std::move(fragment));
        toy.targets.push_back(it->second);
      }
      out.push_back(std::move(toy));
    }
  };
  convert(chinese, task.train_chinese);
  convert(english, task.train_english);
  convert(held_out, task.held_out);
  return task;
}

ArmInit initialise_arm(const ToyTask& task, const TrainConfig& config) {
  ArmInit arm;
  VocabEmbedding model = extend_vocab(task.base, task.fragments);
  const SyllableTokenMap syllables = SyllableTokenMap::build(model.vocab, task.char_pinyin);
  arm.report = init_all(model, task.chinese, task.english, syllables);

  std::vector<bool> skipped(model.vocab.size(), false);
  for (const SkippedToken& s : arm.report.skipped) {
    if (auto row = model.vocab.find(s.token)) skipped[*row] = true;
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (const std::string& fragment : task.fragments) {
    const std::size_t row = *model.vocab.find(braille_token_name(fragment));
    arm.fragment_rows.push_back(row);
    if (skipped[row]) continue;
    for (double v : model.table.row(row)) sum += v * v;
    count += model.table.dim();
  }
  arm.row_scale = count > 0 ? std::sqrt(sum / static_cast<double>(count)) : 1.0;
  if (arm.row_scale == 0.0) arm.row_scale = 1.0;

  // Both arms draw the same stream so the noise rows coincide.
  Rng noise(derive_seed(config.seed, 2));
  for (std::size_t row : arm.fragment_rows) {
    auto values = model.table.row(row);
    for (double& v : values) {
      const double draw = noise.normal() * arm.row_scale;
      if (config.init_mode == InitMode::Random || skipped[row]) v = draw;
    }
  }

  arm.vocab = std::move(model.vocab);
  arm.model = ToyModel(std::move(model.table), task.class_names.size());
  Rng weights(derive_seed(config.seed, 1));
  for (double& w : arm.model.weights) w = config.weight_init_scale * weights.normal();
  return arm;
}

namespace {

std::vector<SequencePair> to_pairs(const std::vector<ToyExample>& examples, const VocabIndex& vocab) {
  std::vector<SequencePair> pairs;
  pairs.reserve(examples.size());
  for (const ToyExample& example : examples) {
    SequencePair pair;
    for (const std::string& fragment : example.fragments) {
      const auto row = vocab.find(braille_token_name(fragment));
      if (!row) throw Error("InvalidTokenId", "fragment '" + fragment + "' is not in the vocabulary");
      pair.source.push_back(*row);
    }
    pair.target = example.targets;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<std::span<const SequencePair>> cut(const std::vector<SequencePair>& pairs, std::size_t size) {
  std::vector<std::span<const SequencePair>> batches;
  if (pairs.empty()) return batches;
  if (size == 0) size = pairs.size();
  for (std::size_t i = 0; i < pairs.size(); i += size) {
    batches.emplace_back(pairs.data() + i, std::min(size, pairs.size() - i));
  }
  return batches;
}

}  // namespace

ArmRun train_arm(const ToyTask& task, const TrainConfig& config) {
  check_config(config);
  if (task.train_chinese.empty() && task.train_english.empty()) {
    throw Error("EmptyCorpus", "no training examples");
  }
  ArmInit arm = initialise_arm(task, config);
  const auto chinese = to_pairs(task.train_chinese, arm.vocab);
  const auto english = to_pairs(task.train_english, arm.vocab);
  const auto held_out = to_pairs(task.held_out, arm.vocab);
  std::vector<SequencePair> all_train = chinese;
  all_train.insert(all_train.end(), english.begin(), english.end());
  const std::vector<SequencePair>& evaluation = held_out.empty() ? all_train : held_out;

  const std::size_t batch_size = config.full_batch ? 0 : config.batch_size;
  const auto chinese_batches = cut(chinese, batch_size);
  const auto english_batches = cut(english, batch_size);

  Optimizer optimizer{config.learning_rate, config.momentum};
  ArmRun run;
  run.seed = config.seed;
  run.initial_loss = forward_nll(arm.model, all_train, config.max_seq_len);
  double previous = run.initial_loss;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const BatchSchedule schedule =
        schedule_batches(chinese_batches.size(), english_batches.size(), derive_seed(config.seed, 100 + epoch));
    for (const ScheduledBatch& b : schedule.batches) {
      const auto batch = b.source == BatchSource::Chinese ? chinese_batches[b.index] : english_batches[b.index];
      optimizer.step(arm.model, backward(arm.model, batch, config.max_seq_len));
    }
    EpochPoint point;
    point.epoch = epoch;
    point.train_loss = forward_nll(arm.model, all_train, config.max_seq_len);
    point.held_out_loss = forward_nll(arm.model, evaluation, config.max_seq_len);
    point.held_out_accuracy = token_accuracy(arm.model, evaluation, config.max_seq_len);
    if (point.train_loss > previous + 1e-12) run.loss_monotone = false;
    previous = point.train_loss;
    if (!run.epochs_to_target && point.held_out_accuracy >= config.target_accuracy) run.epochs_to_target = epoch;
    run.epochs.push_back(point);
  }
  if (!arm.model.all_finite()) throw Error("Diverged", "training produced non-finite parameters");
  return run;
}

double median_epochs(const std::vector<std::optional<std::size_t>>& values) {
  if (values.empty()) return std::numeric_limits<double>::infinity();
  std::vector<double> v;
  for (const auto& x : values) v.push_back(x ? static_cast<double>(*x) : std::numeric_limits<double>::infinity());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

namespace {

bool same_except_init(const TrainConfig& a, const TrainConfig& b) {
  return a.learning_rate == b.learning_rate && a.max_seq_len == b.max_seq_len && a.batch_size == b.batch_size &&
         a.epochs == b.epochs && a.seed == b.seed && a.momentum == b.momentum && a.full_batch == b.full_batch &&
         a.weight_init_scale == b.weight_init_scale && a.target_accuracy == b.target_accuracy;
}

}  // namespace

void summarise_arm(ArmReport& arm) {
  std::vector<std::optional<std::size_t>> epochs;
  std::vector<double> finals;
  for (const ArmRun& run : arm.runs) {
    epochs.push_back(run.epochs_to_target);
    finals.push_back(run.epochs.empty() ? 0.0 : run.epochs.back().held_out_accuracy);
  }
  arm.median_epochs_to_target = median_epochs(epochs);
  std::sort(finals.begin(), finals.end());
  if (!finals.empty()) {
    const std::size_t mid = finals.size() / 2;
    arm.median_final_accuracy = finals.size() % 2 == 1 ? finals[mid] : (finals[mid - 1] + finals[mid]) / 2.0;
  }
}

ExperimentReport run_experiment(const TaskFactory& make_task, const TrainConfig& bkft_config,
                                const TrainConfig& random_config, const std::vector<std::uint64_t>& seeds,
                                unsigned jobs) {
  if (!same_except_init(bkft_config, random_config)) {
    throw Error("ConfigMismatch", "arm configurations may differ only in init_mode");
  }
  if (bkft_config.init_mode != InitMode::Bkft || random_config.init_mode != InitMode::Random) {
    throw Error("ConfigMismatch", "expected one bkft and one random configuration");
  }
  check_config(bkft_config);

  ExperimentReport report;
  report.config = bkft_config;
  report.seeds = seeds;
  report.bkft.mode = InitMode::Bkft;
  report.random.mode = InitMode::Random;
  report.bkft.runs.resize(seeds.size());
  report.random.runs.resize(seeds.size());

  std::vector<std::exception_ptr> failures(seeds.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, seeds.size()));
  auto work = [&](std::size_t worker) {
    for (std::size_t s = worker; s < seeds.size(); s += workers) {
      try {
        const ToyTask task = make_task(seeds[s]);
        TrainConfig config = bkft_config;
        config.seed = seeds[s];
        report.bkft.runs[s] = train_arm(task, config);
        config.init_mode = InitMode::Random;
        report.random.runs[s] = train_arm(task, config);
      } catch (...) {
        failures[s] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (std::thread& t : threads) t.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  summarise_arm(report.bkft);
  summarise_arm(report.random);
  return report;
}

ExperimentReport run_experiment(const ToyTask& task, const TrainConfig& bkft_config, const TrainConfig& random_config,
                                const std::vector<std::uint64_t>& seeds, unsigned jobs) {
  if (task.train_chinese.empty() && task.train_english.empty()) throw Error("EmptyCorpus", "no training examples");
  return run_experiment([&task](std::uint64_t) { return task; }, bkft_config, random_config, seeds, jobs);
}

namespace {

nlohmann::json number_or_null(double value) {
  return std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
}

nlohmann::json arm_json(const ArmReport& arm) {
  nlohmann::json runs = nlohmann::json::array();
  for (const ArmRun& run : arm.runs) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const EpochPoint& p : run.epochs) {
      epochs.push_back({{"epoch", p.epoch},
                        {"train_loss", p.train_loss},
                        {"held_out_loss", p.held_out_loss},
                        {"held_out_accuracy", p.held_out_accuracy}});
    }
    runs.push_back({{"seed", run.seed},
                    {"initial_loss", run.initial_loss},
                    {"epochs_to_target", run.epochs_to_target ? nlohmann::json(*run.epochs_to_target) : nlohmann::json(nullptr)},
                    {"loss_monotone", run.loss_monotone},
                    {"epochs", std::move(epochs)}});
  }
  return {{"init", std::string(to_string(arm.mode))},
          {"median_epochs_to_target", number_or_null(arm.median_epochs_to_target)},
          {"median_final_accuracy", arm.median_final_accuracy},
          {"runs", std::move(runs)}};
}

}  // namespace

std::string to_json(const ExperimentReport& report) {
  const TrainConfig& c = report.config;
  nlohmann::json j = {{"config",
                       {{"learning_rate", c.learning_rate},
                        {"max_seq_len", c.max_seq_len},
                        {"batch_size", c.batch_size},
                        {"epochs", c.epochs},
                        {"momentum", c.momentum},
                        {"full_batch", c.full_batch},
                        {"weight_init_scale", c.weight_init_scale},
                        {"target_accuracy", c.target_accuracy}}},
                      {"seeds", report.seeds},
                      {"arms", nlohmann::json::array()}};
  for (const ArmReport* arm : {&report.bkft, &report.random}) {
    if (!arm->runs.empty()) j["arms"].push_back(arm_json(*arm));
  }
  return j.dump(2);
}

}  // namespace braillekit
