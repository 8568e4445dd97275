#include "sentdoc/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>

#include "sentdoc/inference.hpp"
#include "sentdoc/objective.hpp"
#include "sentdoc/tape.hpp"

namespace sentdoc {

namespace {

/// Restores the global checked-mode flag on scope exit.
class CheckedModeGuard {
 public:
  explicit CheckedModeGuard(bool enable) : previous_(checked_mode()) {
    if (enable) set_checked_mode(true);
  }
  ~CheckedModeGuard() { set_checked_mode(previous_); }

 private:
  bool previous_;
};

/// Scalars one document contributes to its step's summary.
struct DocStats {
  std::optional<double> context_loss;
  double document_loss = 0.0;
  double target_logit_sum = 0.0;
  std::size_t target_count = 0;
  double negative_logit_sum = 0.0;
  std::size_t negative_count = 0;
};

void collect_target_stats(const std::vector<TargetDetail>& targets,
                          DocStats& stats) {
  for (const TargetDetail& td : targets) {
    stats.target_logit_sum += td.target_logit;
    ++stats.target_count;
    for (double l : td.negative_logits) {
      stats.negative_logit_sum += l;
      ++stats.negative_count;
    }
  }
}

/// Builds the tape for one document, runs backward on the combined loss and
/// hands every parameter-block gradient to `sink` in block order (while the
/// tape is still alive, so serial callers can accumulate without copies).
/// Blocks the document never touched are skipped.
DocStats run_document_tape(
    const Corpus& corpus, const ModelParams& model,
    const TrainingConfig& config, const Rng& master, std::size_t epoch,
    std::size_t doc_index,
    const std::function<void(std::size_t, const NumArray&)>& sink) {
  Tape tape;
  const ModelLeaves leaves = register_model(tape, model);
  Rng rng = master.stream({label_hash("doc"), epoch, doc_index});
  LossOptions options;
  options.form = config.loss_form;
  options.mode = RunMode::train;
  options.encoder = config.encoder_options();

  std::vector<TargetDetail> context_details;
  DocumentLossDetail doc_detail;
  const std::optional<Tape::Var> l_cntx =
      context_loss_on_tape(tape, leaves, corpus, doc_index, config.k, config.r,
                           rng, options, &context_details);
  const Tape::Var l_doc = document_loss_on_tape(
      tape, leaves, corpus, doc_index, config.r, rng, options, &doc_detail);

  Tape::Var root = l_doc;
  if (l_cntx)
    root = add(tape, scale(tape, *l_cntx, config.alpha),
               scale(tape, l_doc, 1.0 - config.alpha));
  tape.backward(root);

  DocStats stats;
  if (l_cntx) stats.context_loss = tape.value(*l_cntx).at(0);
  stats.document_loss = tape.value(l_doc).at(0);
  collect_target_stats(context_details, stats);
  collect_target_stats(doc_detail.targets, stats);

  const std::vector<Tape::Var> leaf_vars = leaf_list(leaves);
  for (std::size_t i = 0; i < leaf_vars.size(); ++i)
    if (const NumArray* g = tape.maybe_grad(leaf_vars[i])) sink(i, *g);
  return stats;
}

void apply_sgd(const std::vector<NumArray*>& blocks,
               const std::vector<NumArray>& grads, double lr) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    double* p = blocks[i]->data.data();
    const double* g = grads[i].data.data();
    const std::size_t n = blocks[i]->size();
    for (std::size_t j = 0; j < n; ++j) p[j] -= lr * g[j];
  }
}

/// Adam step; with quantize set, parameters and both moments are rounded
/// through 32-bit floats in the same pass (elementwise, so the result is
/// identical to a separate rounding sweep).
void apply_adam(const std::vector<NumArray*>& blocks,
                const std::vector<NumArray>& grads, OptimizerState& opt,
                const TrainingConfig& config, std::uint64_t step,
                bool quantize) {
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    double* p = blocks[i]->data.data();
    const double* g = grads[i].data.data();
    double* m = opt.m[i].data.data();
    double* v = opt.v[i].data.data();
    const std::size_t n = blocks[i]->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      p[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
      if (quantize) {
        p[j] = static_cast<double>(static_cast<float>(p[j]));
        m[j] = static_cast<double>(static_cast<float>(m[j]));
        v[j] = static_cast<double>(static_cast<float>(v[j]));
      }
    }
  }
}

void apply_sgd_quantized(const std::vector<NumArray*>& blocks,
                         const std::vector<NumArray>& grads, double lr) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    double* p = blocks[i]->data.data();
    const double* g = grads[i].data.data();
    const std::size_t n = blocks[i]->size();
    for (std::size_t j = 0; j < n; ++j)
      p[j] = static_cast<double>(static_cast<float>(p[j] - lr * g[j]));
  }
}

}  // namespace

ModelParams initial_model(std::size_t vocab_size,
                          const TrainingConfig& config) {
  Rng init_rng = Rng(config.seed).stream({label_hash("init")});
  ModelParams model = init_model(vocab_size, init_rng);
  if (config.precision == 32)
    for (NumArray* b : param_blocks(model)) b->quantize_f32();
  return model;
}

Checkpoint train(const Corpus& corpus, const TrainingConfig& config,
                 const StepCallback& callback) {
  config.validate();
  if (corpus.documents.empty())
    throw std::invalid_argument("train: corpus has no documents");
  if (corpus.sentence_index.empty())
    throw std::invalid_argument("train: corpus has no eligible sentences");
  if (config.r > 0 && corpus.documents.size() < 2)
    throw std::invalid_argument(
        "train: negative sampling (r > 0) draws sentences from other "
        "documents; the corpus needs at least two");

  const CheckedModeGuard checked_guard(config.checked);
  const Rng master(config.seed);
  const std::size_t vocab_size = corpus.vocab.id_to_token.size();

  Checkpoint ck;
  ck.params = initial_model(vocab_size, config);
  ck.rng_state = master.state();
  ck.step = 0;

  std::vector<NumArray*> blocks = param_blocks(ck.params);
  ck.opt.kind = config.optimizer == OptimizerKind::adam ? "adam" : "sgd";
  if (config.optimizer == OptimizerKind::adam) {
    for (const NumArray* b : blocks) {
      ck.opt.m.push_back(NumArray::zeros(b->shape));
      ck.opt.v.push_back(NumArray::zeros(b->shape));
    }
  }

  const std::size_t n_docs = corpus.documents.size();
  const std::size_t worker_count =
      config.deterministic ? 1
                           : std::max<std::size_t>(1, config.threads);

  std::vector<NumArray> grad_mean;
  grad_mean.reserve(blocks.size());
  for (const NumArray* b : blocks) grad_mean.push_back(NumArray::zeros(b->shape));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(n_docs);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = master.stream({label_hash("shuffle"), epoch});
    fisher_yates(order, shuffle_rng);

    for (std::size_t begin = 0; begin < n_docs;
         begin += config.docs_per_step) {
      const std::size_t end =
          std::min(n_docs, begin + config.docs_per_step);
      const std::size_t chunk = end - begin;
      const double inv_chunk = 1.0 / static_cast<double>(chunk);
      ++ck.step;

      for (NumArray& g : grad_mean)
        std::fill(g.data.begin(), g.data.end(), 0.0);

      std::vector<DocStats> stats(chunk);
      if (worker_count <= 1 || chunk <= 1) {
        for (std::size_t i = 0; i < chunk; ++i)
          stats[i] = run_document_tape(
              corpus, ck.params, config, master, epoch, order[begin + i],
              [&](std::size_t block, const NumArray& g) {
                axpy_n(inv_chunk, g.data.data(),
                       grad_mean[block].data.data(), g.size());
              });
      } else {
        // Workers fill per-document gradient copies; the reduction below
        // runs over documents in chunk order, so the result is identical
        // to the serial path.
        std::vector<std::vector<std::pair<std::size_t, NumArray>>> doc_grads(
            chunk);
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&] {
          while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= chunk) return;
            try {
              stats[i] = run_document_tape(
                  corpus, ck.params, config, master, epoch, order[begin + i],
                  [&](std::size_t block, const NumArray& g) {
                    doc_grads[i].emplace_back(block, g);
                  });
            } catch (...) {
              const std::lock_guard<std::mutex> lock(error_mutex);
              if (!first_error) first_error = std::current_exception();
              return;
            }
          }
        };
        std::vector<std::thread> threads;
        const std::size_t spawn = std::min(worker_count, chunk);
        threads.reserve(spawn);
        for (std::size_t t = 0; t < spawn; ++t) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
        if (first_error) std::rethrow_exception(first_error);
        for (std::size_t i = 0; i < chunk; ++i)
          for (const auto& [block, g] : doc_grads[i])
            axpy_n(inv_chunk, g.data.data(), grad_mean[block].data.data(),
                   g.size());
      }

      StepInfo info;
      info.step = ck.step;
      info.epoch = epoch;
      info.docs = chunk;
      double total_sum = 0.0;
      double cntx_sum = 0.0;
      std::size_t cntx_docs = 0;
      double doc_sum = 0.0;
      double tl_sum = 0.0;
      std::size_t tl_count = 0;
      double nl_sum = 0.0;
      std::size_t nl_count = 0;
      for (const DocStats& s : stats) {
        total_sum += total_loss(config.alpha, s.context_loss, s.document_loss);
        if (s.context_loss) {
          cntx_sum += *s.context_loss;
          ++cntx_docs;
        } else {
          ++info.context_skips;
        }
        doc_sum += s.document_loss;
        tl_sum += s.target_logit_sum;
        tl_count += s.target_count;
        nl_sum += s.negative_logit_sum;
        nl_count += s.negative_count;
      }
      info.total_loss = total_sum * inv_chunk;
      if (cntx_docs)
        info.context_loss = cntx_sum / static_cast<double>(cntx_docs);
      info.document_loss = doc_sum * inv_chunk;
      if (tl_count)
        info.mean_target_logit = tl_sum / static_cast<double>(tl_count);
      if (nl_count)
        info.mean_negative_logit = nl_sum / static_cast<double>(nl_count);

      const bool quantize = config.precision == 32;
      if (config.optimizer == OptimizerKind::adam)
        apply_adam(blocks, grad_mean, ck.opt, config, ck.step, quantize);
      else if (quantize)
        apply_sgd_quantized(blocks, grad_mean, config.learning_rate);
      else
        apply_sgd(blocks, grad_mean, config.learning_rate);

      if (config.checked) {
        if (!std::isfinite(info.total_loss))
          throw std::runtime_error("train: non-finite loss at step " +
                                   std::to_string(ck.step));
        const auto named = named_param_blocks(ck.params);
        for (const auto& [name, block] : named)
          if (!block->all_finite())
            throw std::runtime_error("train: parameter block '" + name +
                                     "' became non-finite at step " +
                                     std::to_string(ck.step));
      }

      if (callback) callback(info);
    }
  }
  return ck;
}

std::vector<AlphaSweepRow> sweep_alpha(const Corpus& corpus,
                                       const TrainingConfig& base,
                                       const std::vector<double>& alphas,
                                       const std::vector<AspectLabels>& labels,
                                       double split, std::uint64_t eval_seed) {
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0))
      throw std::invalid_argument("sweep_alpha: alpha " + std::to_string(a) +
                                  " outside [0,1]");
  std::vector<AlphaSweepRow> rows;
  rows.reserve(alphas.size());
  for (double a : alphas) {
    AlphaSweepRow row;
    row.alpha = a;
    TrainingConfig config = base;
    config.alpha = a;
    try {
      const std::size_t last_epoch = config.epochs ? config.epochs - 1 : 0;
      double loss_sum = 0.0;
      std::size_t loss_count = 0;
      const Checkpoint ck =
          train(corpus, config, [&](const StepInfo& info) {
            if (info.epoch == last_epoch) {
              loss_sum += info.total_loss;
              ++loss_count;
            }
          });
      row.final_loss =
          loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;

      std::vector<std::pair<std::string, std::vector<double>>> embeddings;
      embeddings.reserve(corpus.documents.size());
      for (const Document& doc : corpus.documents) {
        const NumArray e =
            embed_document(ck.params, doc, config.encoder_options());
        embeddings.emplace_back(
            doc.id, std::vector<double>(e.data.begin(), e.data.end()));
      }
      for (const AspectLabels& aspect : labels)
        row.results.push_back(
            evaluate_split(embeddings, aspect, split, eval_seed));
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sentdoc
