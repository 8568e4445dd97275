#ifndef SENTDOC_OBJECTIVE_HPP
#define SENTDOC_OBJECTIVE_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sentdoc/corpus.hpp"
#include "sentdoc/encoder.hpp"
#include "sentdoc/numarray.hpp"
#include "sentdoc/rng.hpp"
#include "sentdoc/tape.hpp"

namespace sentdoc {

/// Two readings of the negative-sampling loss over one target and its
/// negatives. `standard` is the bounded convention
///   softplus(-l_t) + sum_i softplus(l_neg_i)   (always >= 0);
/// `literal` is the formula as printed in the source description,
///   softplus(-l_t) - sum_i softplus(-l_neg_i),
/// which is unbounded below (driving negative logits to -inf reduces it
/// without limit). literal is kept for fidelity experiments only.
enum class LossForm { standard, literal };

struct LogitSet {
  double target_logit = 0.0;
  std::vector<double> negative_logits;
};

/// Element-wise average of sentence vectors plus the L2 norms of the
/// constituents (the inputs the length adjustment needs).
struct ContextVector {
  NumArray values;  // [100] (or the constituents' common length)
  std::vector<double> constituent_lengths;
};

double neg_sampling_loss(const LogitSet& logits,
                         LossForm form = LossForm::standard);

/// Sequential-summation mean in list order; throws on empty input.
ContextVector mean_vectors(const std::vector<NumArray>& vs);

/// Rescales cv.values to the mean constituent norm. Inputs with norm below
/// 1e-12 pass through unchanged and bump the passthrough counter (or throw
/// in strict mode).
NumArray length_adjust(const ContextVector& cv);

std::uint64_t length_adjust_passthrough_count();
void reset_length_adjust_passthrough_count();
/// Strict mode turns the degenerate-norm passthrough into an exception.
void set_length_adjust_strict(bool strict);

/// Per-target instrumentation filled while a loss is built. `context` is the
/// pre-dot context vector actually used for this target's logits (unadjusted
/// for the context loss, adjusted for the document loss).
struct TargetDetail {
  std::size_t t = 0;  // 1-based target position
  std::vector<std::pair<std::uint32_t, std::uint32_t>> negatives;
  double target_logit = 0.0;
  std::vector<double> negative_logits;
  double loss = 0.0;
  NumArray context;
};

struct DocumentLossDetail {
  NumArray mean_context;      // document average before adjustment
  NumArray adjusted_context;  // after adjustment (shared by all targets)
  std::vector<double> constituent_norms;
  std::vector<TargetDetail> targets;
};

/// Shared knobs for the taped losses. mode=train draws dropout masks from
/// the per-document rng; instrumented runs use infer for determinism.
struct LossOptions {
  LossForm form = LossForm::standard;
  RunMode mode = RunMode::train;
  EncoderOptions encoder;
};

// Taped builders (the training path). rng draw order is fixed and relied on
// by the replay tooling: context loss visits targets in ascending t, and per
// target draws the r negatives first, then encodes context sentences in
// position order, then the target, then the negatives in draw order.
// Document loss first encodes all n sentences in order, then per target
// draws negatives, encodes the target, then the negatives.

Tape::Var context_loss_target_on_tape(Tape& tape, const ModelLeaves& leaves,
                                      const Corpus& corpus,
                                      std::size_t doc_index, std::size_t t,
                                      std::size_t k, std::size_t r, Rng& rng,
                                      const LossOptions& options = {},
                                      TargetDetail* detail = nullptr);

/// Mean over targets t = k+1 .. n-k (denominator n-2k); nullopt when the
/// document has no valid target (n <= 2k).
std::optional<Tape::Var> context_loss_on_tape(
    Tape& tape, const ModelLeaves& leaves, const Corpus& corpus,
    std::size_t doc_index, std::size_t k, std::size_t r, Rng& rng,
    const LossOptions& options = {},
    std::vector<TargetDetail>* details = nullptr);

/// Mean over all n targets sharing one adjusted document-context vector
/// (denominator n).
Tape::Var document_loss_on_tape(Tape& tape, const ModelLeaves& leaves,
                                const Corpus& corpus, std::size_t doc_index,
                                std::size_t r, Rng& rng,
                                const LossOptions& options = {},
                                DocumentLossDetail* detail = nullptr);

// Value-level wrappers over the taped builders (private tape per call).

double context_loss_for_target(const Corpus& corpus, const ModelParams& model,
                               std::size_t doc_index, std::size_t t,
                               std::size_t k, std::size_t r, Rng& rng,
                               const LossOptions& options = {},
                               TargetDetail* detail = nullptr);

std::optional<double> context_loss(const Corpus& corpus,
                                   const ModelParams& model,
                                   std::size_t doc_index, std::size_t k,
                                   std::size_t r, Rng& rng,
                                   const LossOptions& options = {},
                                   std::vector<TargetDetail>* details = nullptr);

double document_loss(const Corpus& corpus, const ModelParams& model,
                     std::size_t doc_index, std::size_t r, Rng& rng,
                     const LossOptions& options = {},
                     DocumentLossDetail* detail = nullptr);

/// alpha*L_cntx + (1-alpha)*L_doc; a missing context loss (document too
/// short for any valid target) yields L_doc and bumps the skip counter.
double total_loss(double alpha, std::optional<double> l_cntx, double l_doc);

std::uint64_t context_skip_count();
void reset_context_skip_count();

// Taped helpers shared with inference.

/// Length adjustment over a taped mean vector and its constituent vectors;
/// value-identical to length_adjust() by construction.
Tape::Var length_adjust_on_tape(Tape& tape, Tape::Var mean_vec,
                                const std::vector<Tape::Var>& constituents);

Tape::Var neg_sampling_loss_on_tape(Tape& tape, Tape::Var target_logit,
                                    const std::vector<Tape::Var>& negative_logits,
                                    LossForm form);

}  // namespace sentdoc

#endif  // SENTDOC_OBJECTIVE_HPP
