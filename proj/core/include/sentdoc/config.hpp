#ifndef SENTDOC_CONFIG_HPP
#define SENTDOC_CONFIG_HPP

#include <cstdint>
#include <string>

#include "sentdoc/objective.hpp"

namespace sentdoc {

enum class OptimizerKind { sgd, adam };

/// Knobs for a training run. File format: UTF-8 `key = value` lines,
/// '#' starts a comment, blank lines ignored, unknown keys rejected.
struct TrainingConfig {
  std::size_t k = 1;       // context half-width
  std::size_t r = 5;       // negatives per target
  double alpha = 0.7;      // context-loss weight in the total loss
  std::size_t epochs = 1;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t docs_per_step = 1;
  std::uint64_t seed = 0;
  LossForm loss_form = LossForm::standard;
  int precision = 32;  // 32: params/optimizer state rounded through f32
  bool deterministic = true;
  // Extensions beyond the core knobs:
  std::size_t threads = 1;       // worker threads per step (grads reduced
                                 // in document order either way)
  bool checked = false;          // per-step finiteness validation
  double dropout_rate = kDefaultDropoutRate;
  bool linear_convs = false;     // skip the post-conv ReLUs

  EncoderOptions encoder_options() const {
    return EncoderOptions{dropout_rate, linear_convs};
  }
  void validate() const;  // throws std::invalid_argument on bad values
};

/// Parses `key = value` config text. Throws std::invalid_argument naming the
/// offending line for unknown keys or unparsable values.
TrainingConfig parse_config_text(const std::string& text);
TrainingConfig load_config(const std::string& path);
std::string config_to_text(const TrainingConfig& config);

}  // namespace sentdoc

#endif  // SENTDOC_CONFIG_HPP
