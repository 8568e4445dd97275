#include "sentdoc/objective.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sentdoc {

namespace {

std::atomic<std::uint64_t> g_passthroughs{0};
std::atomic<bool> g_strict{false};
std::atomic<std::uint64_t> g_context_skips{0};

constexpr double kDegenerateNorm = 1e-12;

const Document& doc_at(const Corpus& corpus, std::size_t doc_index) {
  if (doc_index >= corpus.documents.size())
    throw std::invalid_argument("document index " + std::to_string(doc_index) +
                                " out of range");
  return corpus.documents[doc_index];
}

}  // namespace

double neg_sampling_loss(const LogitSet& logits, LossForm form) {
  double loss = softplus_value(-logits.target_logit);
  for (double l : logits.negative_logits) {
    if (form == LossForm::standard)
      loss += softplus_value(l);
    else
      loss -= softplus_value(-l);
  }
  return loss;
}

ContextVector mean_vectors(const std::vector<NumArray>& vs) {
  if (vs.empty())
    throw std::invalid_argument("mean_vectors: empty vector list");
  ContextVector cv;
  cv.values = NumArray::zeros(vs[0].shape);
  for (const NumArray& v : vs) {
    if (!v.same_shape(vs[0]))
      throw std::invalid_argument("mean_vectors: shape mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) cv.values.data[i] += v.data[i];
    cv.constituent_lengths.push_back(
        std::sqrt(dot_n(v.data.data(), v.data.data(), v.size())));
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (double& x : cv.values.data) x *= inv;
  return cv;
}

NumArray length_adjust(const ContextVector& cv) {
  if (cv.constituent_lengths.empty())
    throw std::invalid_argument("length_adjust: no constituent lengths");
  const NumArray& v = cv.values;
  const double norm = std::sqrt(dot_n(v.data.data(), v.data.data(), v.size()));
  if (norm < kDegenerateNorm) {
    if (g_strict.load(std::memory_order_relaxed))
      throw std::runtime_error(
          "length_adjust: degenerate (near-zero) input norm");
    g_passthroughs.fetch_add(1, std::memory_order_relaxed);
    return v;
  }
  double sum = 0.0;
  for (double l : cv.constituent_lengths) sum += l;
  const double mean_len =
      sum * (1.0 / static_cast<double>(cv.constituent_lengths.size()));
  const double factor = mean_len / norm;
  NumArray out = v;
  for (double& x : out.data) x *= factor;
  return out;
}

std::uint64_t length_adjust_passthrough_count() {
  return g_passthroughs.load(std::memory_order_relaxed);
}
void reset_length_adjust_passthrough_count() { g_passthroughs.store(0); }
void set_length_adjust_strict(bool strict) { g_strict.store(strict); }

std::uint64_t context_skip_count() {
  return g_context_skips.load(std::memory_order_relaxed);
}
void reset_context_skip_count() { g_context_skips.store(0); }

Tape::Var length_adjust_on_tape(Tape& tape, Tape::Var mean_vec,
                                const std::vector<Tape::Var>& constituents) {
  if (constituents.empty())
    throw std::invalid_argument("length_adjust: no constituent vectors");
  const NumArray& v = tape.value(mean_vec);
  const double norm = std::sqrt(dot_n(v.data.data(), v.data.data(), v.size()));
  if (norm < kDegenerateNorm) {
    if (g_strict.load(std::memory_order_relaxed))
      throw std::runtime_error(
          "length_adjust: degenerate (near-zero) input norm");
    g_passthroughs.fetch_add(1, std::memory_order_relaxed);
    return mean_vec;
  }
  std::vector<Tape::Var> norms;
  norms.reserve(constituents.size());
  for (Tape::Var c : constituents) norms.push_back(norm2(tape, c));
  Tape::Var mean_len =
      scale(tape, sum_scalars(tape, norms),
            1.0 / static_cast<double>(constituents.size()));
  Tape::Var factor = div_scalars(tape, mean_len, norm2(tape, mean_vec));
  return scale_by_scalar(tape, mean_vec, factor);
}

Tape::Var neg_sampling_loss_on_tape(
    Tape& tape, Tape::Var target_logit,
    const std::vector<Tape::Var>& negative_logits, LossForm form) {
  std::vector<Tape::Var> terms;
  terms.reserve(1 + negative_logits.size());
  terms.push_back(softplus(tape, negate(tape, target_logit)));
  for (Tape::Var l : negative_logits) {
    if (form == LossForm::standard)
      terms.push_back(softplus(tape, l));
    else
      terms.push_back(negate(tape, softplus(tape, negate(tape, l))));
  }
  return sum_scalars(tape, terms);
}

Tape::Var context_loss_target_on_tape(Tape& tape, const ModelLeaves& leaves,
                                      const Corpus& corpus,
                                      std::size_t doc_index, std::size_t t,
                                      std::size_t k, std::size_t r, Rng& rng,
                                      const LossOptions& options,
                                      TargetDetail* detail) {
  const Document& doc = doc_at(corpus, doc_index);
  const std::size_t n = doc.sentences.size();
  if (k < 1) throw std::invalid_argument("context loss: k must be >= 1");
  if (n <= 2 * k || t < k + 1 || t > n - k)
    throw std::invalid_argument("context loss: target " + std::to_string(t) +
                                " outside [k+1, n-k] for n=" +
                                std::to_string(n));

  const auto negatives = sample_negatives(corpus, doc_index, r, rng);

  const std::size_t t0 = t - 1;
  std::vector<Tape::Var> ctx;
  ctx.reserve(2 * k);
  for (std::size_t i = t0 - k; i < t0; ++i)
    ctx.push_back(encode_on_tape(tape, leaves, Which::cntx, doc.sentences[i],
                                 options.mode, rng, options.encoder));
  for (std::size_t i = t0 + 1; i <= t0 + k; ++i)
    ctx.push_back(encode_on_tape(tape, leaves, Which::cntx, doc.sentences[i],
                                 options.mode, rng, options.encoder));
  // The context loss uses the plain average; no length adjustment here.
  Tape::Var context = mean_of(tape, ctx);

  Tape::Var target = encode_on_tape(tape, leaves, Which::cdd,
                                    doc.sentences[t0], options.mode, rng,
                                    options.encoder);
  Tape::Var l_t = dot(tape, context, target);
  std::vector<Tape::Var> l_negs;
  l_negs.reserve(negatives.size());
  for (const auto& [nd, ns] : negatives) {
    Tape::Var neg = encode_on_tape(tape, leaves, Which::cdd,
                                   corpus.documents[nd].sentences[ns],
                                   options.mode, rng, options.encoder);
    l_negs.push_back(dot(tape, context, neg));
  }
  Tape::Var loss = neg_sampling_loss_on_tape(tape, l_t, l_negs, options.form);

  if (detail) {
    detail->t = t;
    detail->negatives = negatives;
    detail->target_logit = tape.value(l_t).data[0];
    detail->negative_logits.clear();
    for (Tape::Var l : l_negs)
      detail->negative_logits.push_back(tape.value(l).data[0]);
    detail->loss = tape.value(loss).data[0];
    detail->context = tape.value(context);
  }
  return loss;
}

std::optional<Tape::Var> context_loss_on_tape(
    Tape& tape, const ModelLeaves& leaves, const Corpus& corpus,
    std::size_t doc_index, std::size_t k, std::size_t r, Rng& rng,
    const LossOptions& options, std::vector<TargetDetail>* details) {
  const Document& doc = doc_at(corpus, doc_index);
  const std::size_t n = doc.sentences.size();
  if (k < 1) throw std::invalid_argument("context loss: k must be >= 1");
  if (n <= 2 * k) return std::nullopt;

  std::vector<Tape::Var> losses;
  losses.reserve(n - 2 * k);
  for (std::size_t t = k + 1; t <= n - k; ++t) {
    TargetDetail* d = nullptr;
    if (details) {
      details->emplace_back();
      d = &details->back();
    }
    losses.push_back(context_loss_target_on_tape(tape, leaves, corpus,
                                                 doc_index, t, k, r, rng,
                                                 options, d));
  }
  return scale(tape, sum_scalars(tape, losses),
               1.0 / static_cast<double>(n - 2 * k));
}

Tape::Var document_loss_on_tape(Tape& tape, const ModelLeaves& leaves,
                                const Corpus& corpus, std::size_t doc_index,
                                std::size_t r, Rng& rng,
                                const LossOptions& options,
                                DocumentLossDetail* detail) {
  const Document& doc = doc_at(corpus, doc_index);
  const std::size_t n = doc.sentences.size();

  std::vector<Tape::Var> sent_vecs;
  sent_vecs.reserve(n);
  for (const Sentence& s : doc.sentences)
    sent_vecs.push_back(encode_on_tape(tape, leaves, Which::cntx, s,
                                       options.mode, rng, options.encoder));
  Tape::Var mean = mean_of(tape, sent_vecs);
  // One adjusted context per document, shared by all n targets.
  Tape::Var context = length_adjust_on_tape(tape, mean, sent_vecs);

  if (detail) {
    detail->mean_context = tape.value(mean);
    detail->adjusted_context = tape.value(context);
    detail->constituent_norms.clear();
    for (Tape::Var v : sent_vecs) {
      const NumArray& a = tape.value(v);
      detail->constituent_norms.push_back(
          std::sqrt(dot_n(a.data.data(), a.data.data(), a.size())));
    }
  }

  std::vector<Tape::Var> losses;
  losses.reserve(n);
  for (std::size_t t = 1; t <= n; ++t) {
    const auto negatives = sample_negatives(corpus, doc_index, r, rng);
    Tape::Var target = encode_on_tape(tape, leaves, Which::cdd,
                                      doc.sentences[t - 1], options.mode, rng,
                                      options.encoder);
    Tape::Var l_t = dot(tape, context, target);
    std::vector<Tape::Var> l_negs;
    l_negs.reserve(negatives.size());
    for (const auto& [nd, ns] : negatives) {
      Tape::Var neg = encode_on_tape(tape, leaves, Which::cdd,
                                     corpus.documents[nd].sentences[ns],
                                     options.mode, rng, options.encoder);
      l_negs.push_back(dot(tape, context, neg));
    }
    Tape::Var loss =
        neg_sampling_loss_on_tape(tape, l_t, l_negs, options.form);
    losses.push_back(loss);

    if (detail) {
      detail->targets.emplace_back();
      TargetDetail& d = detail->targets.back();
      d.t = t;
      d.negatives = negatives;
      d.target_logit = tape.value(l_t).data[0];
      for (Tape::Var l : l_negs)
        d.negative_logits.push_back(tape.value(l).data[0]);
      d.loss = tape.value(loss).data[0];
      d.context = tape.value(context);
    }
  }
  return scale(tape, sum_scalars(tape, losses),
               1.0 / static_cast<double>(n));
}

double context_loss_for_target(const Corpus& corpus, const ModelParams& model,
                               std::size_t doc_index, std::size_t t,
                               std::size_t k, std::size_t r, Rng& rng,
                               const LossOptions& options,
                               TargetDetail* detail) {
  Tape tape;
  const ModelLeaves leaves = register_model(tape, model);
  const Tape::Var loss = context_loss_target_on_tape(
      tape, leaves, corpus, doc_index, t, k, r, rng, options, detail);
  return tape.value(loss).data[0];
}

std::optional<double> context_loss(const Corpus& corpus,
                                   const ModelParams& model,
                                   std::size_t doc_index, std::size_t k,
                                   std::size_t r, Rng& rng,
                                   const LossOptions& options,
                                   std::vector<TargetDetail>* details) {
  Tape tape;
  const ModelLeaves leaves = register_model(tape, model);
  const auto loss = context_loss_on_tape(tape, leaves, corpus, doc_index, k, r,
                                         rng, options, details);
  if (!loss) return std::nullopt;
  return tape.value(*loss).data[0];
}

double document_loss(const Corpus& corpus, const ModelParams& model,
                     std::size_t doc_index, std::size_t r, Rng& rng,
                     const LossOptions& options, DocumentLossDetail* detail) {
  Tape tape;
  const ModelLeaves leaves = register_model(tape, model);
  const Tape::Var loss = document_loss_on_tape(tape, leaves, corpus, doc_index,
                                               r, rng, options, detail);
  return tape.value(loss).data[0];
}

double total_loss(double alpha, std::optional<double> l_cntx, double l_doc) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("total_loss: alpha must lie in [0,1]");
  if (!l_cntx) {
    g_context_skips.fetch_add(1, std::memory_order_relaxed);
    return l_doc;
  }
  return alpha * *l_cntx + (1.0 - alpha) * l_doc;
}

}  // namespace sentdoc
