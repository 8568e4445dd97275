#ifndef SENTDOC_TRAINER_HPP
#define SENTDOC_TRAINER_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sentdoc/checkpoint.hpp"
#include "sentdoc/config.hpp"
#include "sentdoc/corpus.hpp"
#include "sentdoc/eval.hpp"

namespace sentdoc {

struct StepInfo {
  std::size_t step = 0;   // global, 1-based
  std::size_t epoch = 0;  // 0-based
  std::size_t docs = 0;   // documents in this step
  double total_loss = 0.0;
  /// Mean context loss over the step's documents that had valid targets;
  /// empty when every document was too short (n <= 2k).
  std::optional<double> context_loss;
  double document_loss = 0.0;
  double mean_target_logit = 0.0;
  double mean_negative_logit = 0.0;
  std::size_t context_skips = 0;  // documents without valid targets
};

using StepCallback = std::function<void(const StepInfo&)>;

/// Full training run: per epoch, documents are visited in seeded-shuffled
/// order, grouped into docs_per_step chunks; each chunk contributes the mean
/// total loss of its documents and one optimizer update. Per-document rng
/// streams are keyed by (seed, epoch, document index), so the sampled
/// negatives and dropout masks do not depend on the execution schedule, and
/// gradients are reduced in document order — runs are bit-reproducible for
/// a given seed at any thread count.
Checkpoint train(const Corpus& corpus, const TrainingConfig& config,
                 const StepCallback& callback = {});

/// Reconstructs the model a fresh train() with this config would start
/// from (initialization is a pure function of the seed).
ModelParams initial_model(std::size_t vocab_size, const TrainingConfig& config);

struct AlphaSweepRow {
  double alpha = 0.0;
  bool ok = false;
  std::string error;                 // set when ok is false
  double final_loss = 0.0;           // mean total loss over the last epoch
  std::vector<EvalResult> results;   // one per aspect
};

/// Trains one model per alpha (identical seeds otherwise) and evaluates the
/// frozen embeddings with the linear-classifier protocol. A failing row
/// carries its error and does not stop the sweep.
std::vector<AlphaSweepRow> sweep_alpha(const Corpus& corpus,
                                       const TrainingConfig& base,
                                       const std::vector<double>& alphas,
                                       const std::vector<AspectLabels>& labels,
                                       double split, std::uint64_t eval_seed);

}  // namespace sentdoc

#endif  // SENTDOC_TRAINER_HPP
