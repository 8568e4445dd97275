#ifndef SENTDOC_ENCODER_HPP
#define SENTDOC_ENCODER_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sentdoc/corpus.hpp"
#include "sentdoc/numarray.hpp"
#include "sentdoc/rng.hpp"
#include "sentdoc/tape.hpp"

namespace sentdoc {

constexpr std::size_t kEmbedDim = 100;   // word embedding width
constexpr std::size_t kOutputDim = 100;  // sentence vector width
/// Shortest input the layer stack accepts: two width-2 convolutions, a
/// 2/2 max pool, two more convolutions and a second pool need
/// floor((T-2)/2) - 2 >= 2, i.e. T >= 10. Shorter sentences are
/// right-padded with PAD up to this length.
constexpr std::size_t kMinEncoderInput = 10;

constexpr double kDefaultDropoutRate = 0.5;

enum class Which { cntx, cdd };

/// All trainable arrays of one sentence encoder (embedding table excluded;
/// it is shared and lives in ModelParams).
struct EncoderParams {
  NumArray conv1_w, conv1_b;  // [128 x 2 x 100], [128]
  NumArray conv2_w, conv2_b;  // [256 x 2 x 128], [256]
  NumArray conv3_w, conv3_b;  // [256 x 2 x 256], [256]
  NumArray conv4_w, conv4_b;  // [256 x 2 x 256], [256]
  NumArray fc1_w, fc1_b;      // [1024 x 256], [1024]
  NumArray fc2_w, fc2_b;      // [100 x 1024], [100]
};

/// Shared embedding table plus the two encoders. The context and candidate
/// encoders share only the table; everything else is disjoint storage.
struct ModelParams {
  NumArray embedding;  // [V x 100]
  EncoderParams cntx;
  EncoderParams cdd;

  std::size_t vocab_size() const { return embedding.rows(); }
};

struct EncoderOptions {
  double dropout_rate = kDefaultDropoutRate;
  /// Reproduces the layer table exactly as printed (no nonlinearity after
  /// the convolutions). Off by default; see init_model notes.
  bool linear_convs = false;
};

/// Deterministic initialization: embeddings uniform in [-0.5/100, 0.5/100],
/// conv/dense weights Glorot-uniform in +/- sqrt(6/(fan_in+fan_out)), all
/// biases zero. The PAD row is a normal trainable row.
ModelParams init_model(std::size_t vocab_size, Rng& rng);

/// All-zero arrays with the correct shapes (deserialization target).
ModelParams zero_model(std::size_t vocab_size);

/// Leaf handles for every parameter block of a model on one tape. Register
/// once per tape, reuse across all encode calls recorded on it.
struct ModelLeaves {
  Tape::Var embedding;
  struct EncoderLeaves {
    Tape::Var conv1_w, conv1_b, conv2_w, conv2_b, conv3_w, conv3_b, conv4_w,
        conv4_b, fc1_w, fc1_b, fc2_w, fc2_b;
  } cntx, cdd;
};

ModelLeaves register_model(Tape& tape, const ModelParams& model);

/// Records the full sentence encoder on the tape and returns the length-100
/// sentence vector. Layer order: embedding lookup (PAD-extended to
/// kMinEncoderInput) -> conv 128 -> conv 256 -> maxpool -> conv 256 ->
/// conv 256 -> maxpool -> global average pool -> fc 1024 (ReLU) -> fc 100 ->
/// dropout. Convolutions are followed by ReLU unless options.linear_convs.
/// Dropout draws from rng only in train mode.
Tape::Var encode_on_tape(Tape& tape, const ModelLeaves& leaves, Which which,
                         const Sentence& sentence, RunMode mode, Rng& rng,
                         const EncoderOptions& options = {});

/// Value-level wrapper over encode_on_tape on a private tape.
NumArray encode(const ModelParams& model, Which which, const Sentence& sentence,
                RunMode mode, Rng& rng, const EncoderOptions& options = {});

/// Elementwise equal to encode() on each sentence, in order.
std::vector<NumArray> encode_batch(const ModelParams& model, Which which,
                                   const std::vector<Sentence>& sentences,
                                   RunMode mode, Rng& rng,
                                   const EncoderOptions& options = {});

/// Every parameter block in the fixed serialization order: embedding, then
/// cntx conv1..fc2 (weight before bias), then cdd likewise.
std::vector<std::pair<std::string, NumArray*>> named_param_blocks(
    ModelParams& model);
std::vector<std::pair<std::string, const NumArray*>> named_param_blocks(
    const ModelParams& model);
std::vector<NumArray*> param_blocks(ModelParams& model);

/// Leaf handles in the same order as param_blocks.
std::vector<Tape::Var> leaf_list(const ModelLeaves& leaves);

/// Inverse of leaf_list: rebuilds the handle struct from 25 vars in block
/// order (gradient-check builders receive leaves this way).
ModelLeaves model_leaves_from(const std::vector<Tape::Var>& vars);

}  // namespace sentdoc

#endif  // SENTDOC_ENCODER_HPP
