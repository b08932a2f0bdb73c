#pragma once

// A position-wise embedding + softmax decoder trained by negative
// log-likelihood, used to compare knowledge-based and random initialisation of
// Braille token embeddings.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "braillekit/bkft.hpp"
#include "braillekit/dataset.hpp"
#include "braillekit/embedding.hpp"
#include "braillekit/knowledge_base.hpp"

namespace braillekit {

// Source rows and target classes, one per position.
struct SequencePair {
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
};

// p(y | s) = softmax(E[s] W + b). W is d x classes, row-major.
struct ToyModel {
  EmbeddingTable embedding;
  std::size_t classes = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  ToyModel() = default;
  ToyModel(EmbeddingTable table, std::size_t class_count);

  std::size_t dim() const noexcept { return embedding.dim(); }
  double& weight(std::size_t i, std::size_t k) { return weights[i * classes + k]; }
  double weight(std::size_t i, std::size_t k) const { return weights[i * classes + k]; }
  bool all_finite() const noexcept;
};

struct Gradient {
  std::map<std::size_t, std::vector<double>> embedding;  // only rows that were used
  std::vector<double> weights;
  std::vector<double> bias;
  double loss = 0.0;

  // Zeros for rows the batch did not touch.
  std::vector<double> embedding_row(std::size_t row, std::size_t dim) const;
  double squared_norm() const;
};

// Mean over all positions of -log p(target | source). Throws
// Error("InvalidTokenId"), Error("LengthMismatch") or Error("EmptyBatch").
double forward_nll(const ToyModel& model, std::span<const SequencePair> batch, std::size_t max_seq_len = 1024);
Gradient backward(const ToyModel& model, std::span<const SequencePair> batch, std::size_t max_seq_len = 1024);

// Share of positions whose arg-max class is the target.
double token_accuracy(const ToyModel& model, std::span<const SequencePair> data, std::size_t max_seq_len = 1024);

enum class BatchSource { Chinese, English };

struct ScheduledBatch {
  BatchSource source;
  std::size_t index;  // batch index within its corpus
  friend bool operator==(const ScheduledBatch&, const ScheduledBatch&) = default;
};

struct BatchSchedule {
  std::vector<ScheduledBatch> batches;
  std::vector<BatchSource> labels() const;
};

// C, E, C, E, ... while both corpora have batches left, then the remainder;
// batch order within each corpus is shuffled by `seed`.
BatchSchedule schedule_batches(std::size_t chinese_batches, std::size_t english_batches, std::uint64_t seed);

enum class InitMode { Bkft, Random };
std::string_view to_string(InitMode mode) noexcept;
InitMode parse_init_mode(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t max_seq_len = 1024;
  std::size_t batch_size = 8;
  std::size_t epochs = 3;
  std::uint64_t seed = 0;
  InitMode init_mode = InitMode::Bkft;
  double momentum = 0.0;
  bool full_batch = false;  // one batch per corpus per epoch
  double weight_init_scale = 0.01;
  double target_accuracy = 0.9;
};

// Throws Error("InvalidConfig") for non-positive hyperparameters.
void check_config(const TrainConfig& config);

// Plain gradient descent step with optional momentum. `velocity` is resized on
// first use.
struct Optimizer {
  Optimizer(double rate, double momentum_factor) : learning_rate(rate), momentum(momentum_factor) {}

  double learning_rate = 1e-4;
  double momentum = 0.0;
  void step(ToyModel& model, const Gradient& gradient);

 private:
  std::vector<double> embedding_velocity_;
  std::vector<double> weight_velocity_;
  std::vector<double> bias_velocity_;
};

// Braille fragments on the source side, output class ids on the target side.
struct ToyExample {
  std::vector<std::string> fragments;
  std::vector<std::size_t> targets;
};

// Everything one experiment needs: pretrained text-token embeddings, the two
// prior knowledge bases, the character reading table and the data.
struct ToyTask {
  VocabEmbedding base;
  KnowledgeBase chinese{Language::Chinese};
  KnowledgeBase english{Language::English};
  CharPinyinTable char_pinyin;
  std::vector<std::string> fragments;  // Braille tokens added to the vocabulary
  std::vector<std::string> class_names;
  std::vector<ToyExample> train_chinese;
  std::vector<ToyExample> train_english;
  std::vector<ToyExample> held_out;  // empty: accuracy is measured on the training data
};

// Builds a task from aligned corpora. Every alignment pair is one position:
// its Braille unit (separators removed) is the source fragment and its text
// unit is the target class. Unaligned examples are skipped.
ToyTask task_from_corpora(const std::vector<ParallelExample>& chinese, const std::vector<ParallelExample>& english,
                          const std::vector<ParallelExample>& held_out, VocabEmbedding base, KnowledgeBase kc,
                          KnowledgeBase ke, CharPinyinTable char_pinyin);

struct ArmInit {
  VocabIndex vocab;
  ToyModel model;
  InitReport report;
  double row_scale = 0.0;  // RMS of the knowledge-initialised rows
  std::vector<std::size_t> fragment_rows;
};

// Extends the vocabulary, runs knowledge-based initialisation and, for the
// random arm, replaces every fragment row with Gaussian noise of the same RMS.
// Fragments the knowledge bases cannot initialise get noise in both arms.
ArmInit initialise_arm(const ToyTask& task, const TrainConfig& config);

struct EpochPoint {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double held_out_loss = 0.0;
  double held_out_accuracy = 0.0;
};

struct ArmRun {
  std::uint64_t seed = 0;
  double initial_loss = 0.0;
  std::vector<EpochPoint> epochs;
  std::optional<std::size_t> epochs_to_target;  // first epoch reaching target accuracy
  bool loss_monotone = true;                    // within 1e-12 per epoch
};

// Trains one arm for config.epochs epochs.
ArmRun train_arm(const ToyTask& task, const TrainConfig& config);

struct ArmReport {
  InitMode mode = InitMode::Bkft;
  std::vector<ArmRun> runs;
  double median_epochs_to_target = std::numeric_limits<double>::infinity();
  double median_final_accuracy = 0.0;
};

struct ExperimentReport {
  TrainConfig config;  // the shared settings; seed is per run
  std::vector<std::uint64_t> seeds;
  ArmReport bkft;
  ArmReport random;
};

// Runs both arms for every seed with identical data and batch schedules.
// Throws Error("ConfigMismatch") when the configs differ beyond init_mode,
// Error("EmptyCorpus") without training data.
ExperimentReport run_experiment(const ToyTask& task, const TrainConfig& bkft_config, const TrainConfig& random_config,
                                const std::vector<std::uint64_t>& seeds, unsigned jobs = 1);

// As above, but every seed trains both arms on its own task.
using TaskFactory = std::function<ToyTask(std::uint64_t seed)>;
ExperimentReport run_experiment(const TaskFactory& make_task, const TrainConfig& bkft_config,
                                const TrainConfig& random_config, const std::vector<std::uint64_t>& seeds,
                                unsigned jobs = 1);

// Fills the medians from the runs.
void summarise_arm(ArmReport& arm);

// Median with missing values counted as infinite.
double median_epochs(const std::vector<std::optional<std::size_t>>& values);

// Arms without runs are left out.
std::string to_json(const ExperimentReport& report);

}  // namespace braillekit
