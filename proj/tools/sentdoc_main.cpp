// Command-line front end: corpus preparation, training, embedding,
// linear-probe evaluation, gradient verification, and the step-by-step
// numeric dump used by the independent reimplementation check.
//
// Exit codes: 0 success, 1 runtime failure (message on stderr), 2 usage
// error. All randomness derives from the --seed flags through named
// streams, and every output is byte-identical across runs with identical
// inputs and flags.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sentdoc/checkpoint.hpp"
#include "sentdoc/config.hpp"
#include "sentdoc/corpus.hpp"
#include "sentdoc/eval.hpp"
#include "sentdoc/gradcheck_suite.hpp"
#include "sentdoc/inference.hpp"
#include "sentdoc/objective.hpp"
#include "sentdoc/synthetic.hpp"
#include "sentdoc/trainer.hpp"

namespace {

using namespace sentdoc;

std::string fmt(double v) { return format_double(v); }

std::string join_ids(const Sentence& s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << ' ';
    os << s[i];
  }
  return os.str();
}

std::string join_doubles(const double* v, std::size_t n) {
  std::ostringstream os;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) os << ' ';
    os << fmt(v[i]);
  }
  return os.str();
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (piece.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(piece, &used);
    if (used != piece.size())
      throw std::runtime_error("bad number in list: '" + piece + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::runtime_error("empty number list");
  return out;
}

/// Aspect name for a label file: the file stem, minus everything through
/// the "labels-" marker the synth command writes ("toy-labels-smell.tsv"
/// -> "smell"; files without the marker keep their full stem).
std::string aspect_name_from_path(const std::string& path) {
  std::string stem = std::filesystem::path(path).stem().string();
  const std::string marker = "labels-";
  const std::size_t at = stem.rfind(marker);
  if (at != std::string::npos) stem = stem.substr(at + marker.size());
  return stem;
}

AspectLabels load_aspect_label_file(const std::string& path) {
  AspectLabels labels;
  labels.aspect = aspect_name_from_path(path);
  for (const auto& [doc, y] : load_labels(path)) labels.by_doc[doc] = y;
  return labels;
}

Corpus load_encoded_corpus(const std::string& input_path,
                           const std::string& vocab_path) {
  const std::vector<RawDocument> raw = read_raw_corpus(input_path);
  const Vocabulary vocab = load_vocabulary(vocab_path);
  return encode_corpus(raw, vocab);
}

int cmd_build_vocab(const std::string& input, std::uint64_t min_count,
                    const std::string& out) {
  const std::vector<RawDocument> raw = read_raw_corpus(input);
  const Vocabulary vocab = build_vocabulary(raw, min_count);
  save_vocabulary(vocab, out);
  std::cout << "vocab_size\t" << vocab.size() << '\n';
  return 0;
}

int cmd_train(const std::string& input, const std::string& vocab_path,
              const std::string& config_path, const std::string& out,
              const std::optional<std::uint64_t>& seed,
              const std::optional<std::size_t>& threads) {
  TrainingConfig config = load_config(config_path);
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  config.validate();
  const Corpus corpus = load_encoded_corpus(input, vocab_path);
  const Checkpoint ck = train(corpus, config, [](const StepInfo& si) {
    std::cout << si.step << '\t' << fmt(si.total_loss) << '\t'
              << (si.context_loss ? fmt(*si.context_loss)
                                  : std::string("nan"))
              << '\t' << fmt(si.document_loss) << '\n';
  });
  save_checkpoint(ck, out);
  return 0;
}

int cmd_embed(const std::string& ckpt_path, const std::string& input,
              const std::string& vocab_path, const std::string& out) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  const Corpus corpus = load_encoded_corpus(input, vocab_path);
  if (corpus.vocab.size() != ck.vocab_size())
    throw std::runtime_error(
        "vocabulary size " + std::to_string(corpus.vocab.size()) +
        " does not match checkpoint embedding rows " +
        std::to_string(ck.vocab_size()));
  const std::size_t n = embed_corpus(ck.params, corpus, out);
  std::cout << "embedded\t" << n << '\n';
  return 0;
}

int cmd_eval(const std::string& emb_path,
             const std::vector<std::string>& label_paths, double split,
             std::uint64_t seed, const std::string& out) {
  const auto embeddings = load_embeddings(emb_path);
  std::vector<EvalResult> results;
  std::cout << "aspect\taccuracy\ttrain\ttest\n";
  for (const std::string& path : label_paths) {
    const AspectLabels labels = load_aspect_label_file(path);
    const EvalResult r = evaluate_split(embeddings, labels, split, seed);
    std::cout << r.aspect << '\t' << fmt(r.accuracy) << '\t' << r.train_size
              << '\t' << r.test_size << '\n';
    results.push_back(r);
  }
  if (!out.empty()) {
    std::vector<std::string> metadata = {
        "split " + fmt(split), "seed " + std::to_string(seed),
        "embeddings " + emb_path};
    save_results(results, metadata, out);
  }
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t coords, double eps,
                  double tol) {
  const GradSuiteResult suite = run_gradient_suite(seed, coords, eps, tol);
  for (const GradSuiteCase& c : suite.cases) {
    std::cout << c.name << '\t' << fmt(c.report.max_rel_error) << '\t'
              << c.report.coords_checked << '\t'
              << c.report.coords_skipped_nonsmooth << '\t'
              << (c.pass ? "pass" : "FAIL") << '\n';
  }
  std::cout << "suite\t" << (suite.pass ? "pass" : "FAIL") << '\n';
  return suite.pass ? 0 : 1;
}

int cmd_oracle(const std::string& ckpt_path, const std::string& input,
               const std::string& vocab_path, const std::string& doc_id,
               std::uint64_t seed, std::size_t k, std::size_t r, double alpha,
               const std::string& form_name) {
  LossForm form;
  if (form_name == "standard")
    form = LossForm::standard;
  else if (form_name == "literal")
    form = LossForm::literal;
  else
    throw std::runtime_error("unknown loss form '" + form_name + "'");

  const Checkpoint ck = load_checkpoint(ckpt_path);
  const Corpus corpus = load_encoded_corpus(input, vocab_path);
  if (corpus.vocab.size() != ck.vocab_size())
    throw std::runtime_error(
        "vocabulary size " + std::to_string(corpus.vocab.size()) +
        " does not match checkpoint embedding rows " +
        std::to_string(ck.vocab_size()));

  std::size_t doc_index = corpus.documents.size();
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    if (corpus.documents[d].id == doc_id) {
      doc_index = d;
      break;
    }
  if (doc_index == corpus.documents.size())
    throw std::runtime_error("document id '" + doc_id + "' not found");
  const Document& doc = corpus.documents[doc_index];

  // Instrumented recompute in 64-bit inference mode (dropout inert). One
  // named stream drives all negative draws: context targets first (each
  // drawing its r negatives in order), then the document targets. The dump
  // lists every drawn negative, so a reimplementation needs no generator —
  // it replays the transcript.
  Rng rng = Rng(seed).stream(
      {label_hash("oracle"), static_cast<std::uint64_t>(doc_index)});
  LossOptions options;
  options.form = form;
  options.mode = RunMode::infer;

  std::ostream& os = std::cout;
  os << "oracle_version\t1\n";
  os << "doc_id\t" << doc.id << '\n';
  os << "doc_index\t" << doc_index << '\n';
  os << "vocab_size\t" << corpus.vocab.size() << '\n';
  os << "k\t" << k << '\n';
  os << "r\t" << r << '\n';
  os << "alpha\t" << fmt(alpha) << '\n';
  os << "form\t" << form_name << '\n';
  os << "n_sentences\t" << doc.sentences.size() << '\n';
  for (std::size_t sidx = 0; sidx < doc.sentences.size(); ++sidx)
    os << "sent." << sidx << '\t' << join_ids(doc.sentences[sidx]) << '\n';

  const auto dump_target = [&](const std::string& prefix,
                               const TargetDetail& td, bool with_context) {
    const std::string base = prefix + ".t" + std::to_string(td.t);
    for (std::size_t i = 0; i < td.negatives.size(); ++i) {
      const auto [nd, ns] = td.negatives[i];
      os << base << ".neg" << i << '\t' << nd << ' ' << ns << '\n';
      os << base << ".neg" << i << ".ids\t"
         << join_ids(corpus.documents[nd].sentences[ns]) << '\n';
    }
    if (with_context)
      os << base << ".context\t"
         << join_doubles(td.context.data.data(), td.context.size()) << '\n';
    os << base << ".l_t\t" << fmt(td.target_logit) << '\n';
    for (std::size_t i = 0; i < td.negative_logits.size(); ++i)
      os << base << ".l_neg" << i << '\t' << fmt(td.negative_logits[i])
         << '\n';
    os << base << ".loss\t" << fmt(td.loss) << '\n';
  };

  std::vector<TargetDetail> cntx_details;
  const std::optional<double> l_cntx =
      context_loss(corpus, ck.params, doc_index, k, r, rng, options,
                   &cntx_details);
  os << "cntx.valid\t" << (l_cntx ? 1 : 0) << '\n';
  for (const TargetDetail& td : cntx_details)
    dump_target("cntx", td, /*with_context=*/true);
  if (l_cntx) os << "cntx.loss\t" << fmt(*l_cntx) << '\n';

  DocumentLossDetail doc_detail;
  const double l_doc =
      document_loss(corpus, ck.params, doc_index, r, rng, options, &doc_detail);
  os << "doc.context_mean\t"
     << join_doubles(doc_detail.mean_context.data.data(),
                     doc_detail.mean_context.size())
     << '\n';
  os << "doc.norms\t"
     << join_doubles(doc_detail.constituent_norms.data(),
                     doc_detail.constituent_norms.size())
     << '\n';
  os << "doc.context_adjusted\t"
     << join_doubles(doc_detail.adjusted_context.data.data(),
                     doc_detail.adjusted_context.size())
     << '\n';
  for (const TargetDetail& td : doc_detail.targets)
    dump_target("doc", td, /*with_context=*/false);
  os << "doc.loss\t" << fmt(l_doc) << '\n';
  os << "total\t" << fmt(total_loss(alpha, l_cntx, l_doc)) << '\n';
  return 0;
}

int cmd_synth(std::uint64_t seed, std::size_t docs, std::size_t aspects,
              const std::string& prefix) {
  const SyntheticCorpus synth = generate_synthetic_corpus(seed, docs, aspects);
  const std::string corpus_path = prefix + "corpus.tsv";
  save_corpus_tsv(synth.corpus, corpus_path);
  std::cout << "wrote\t" << corpus_path << '\n';
  for (std::size_t a = 0; a < synth.aspect_names.size(); ++a) {
    std::vector<std::pair<std::string, int>> rows;
    for (std::size_t d = 0; d < synth.corpus.documents.size(); ++d)
      rows.emplace_back(synth.corpus.documents[d].id, synth.labels[a][d]);
    const std::string path =
        prefix + "labels-" + synth.aspect_names[a] + ".tsv";
    save_labels(rows, path);
    std::cout << "wrote\t" << path << '\n';
  }
  const std::string subset_path = prefix + "subset.tsv";
  save_subset_markers(synth, subset_path);
  std::cout << "wrote\t" << subset_path << '\n';
  return 0;
}

int cmd_sweep_alpha(const std::string& input, const std::string& vocab_path,
                    const std::string& config_path,
                    const std::string& alphas_text,
                    const std::vector<std::string>& label_paths, double split,
                    std::uint64_t eval_seed,
                    const std::optional<std::uint64_t>& seed,
                    const std::optional<std::size_t>& threads) {
  const std::vector<double> alphas = parse_double_list(alphas_text);
  TrainingConfig config = load_config(config_path);
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  const Corpus corpus = load_encoded_corpus(input, vocab_path);
  std::vector<AspectLabels> labels;
  for (const std::string& path : label_paths)
    labels.push_back(load_aspect_label_file(path));

  const std::vector<AlphaSweepRow> rows =
      sweep_alpha(corpus, config, alphas, labels, split, eval_seed);
  std::cout << "alpha\tfinal_loss\taccuracies\n";
  for (const AlphaSweepRow& row : rows) {
    std::cout << fmt(row.alpha) << '\t';
    if (!row.ok) {
      std::cout << "error: " << row.error << '\n';
      continue;
    }
    std::cout << fmt(row.final_loss);
    for (const EvalResult& r : row.results)
      std::cout << '\t' << r.aspect << '=' << fmt(r.accuracy);
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Document embeddings from a pair of sentence-level convolutional "
      "encoders trained with a negative-sampling context objective."};
  app.require_subcommand(1);

  // build-vocab
  std::string bv_input, bv_out;
  std::uint64_t bv_min_count = 5;
  CLI::App* bv = app.add_subcommand(
      "build-vocab", "Build a frequency-ordered vocabulary from a corpus");
  bv->add_option("--input", bv_input, "Corpus TSV (doc_id<TAB>text)")
      ->required();
  bv->add_option("--min-count", bv_min_count,
                 "Minimum token frequency to receive an id");
  bv->add_option("--out", bv_out, "Vocabulary file to write")->required();

  // train
  std::string tr_input, tr_vocab, tr_config, tr_out;
  std::optional<std::uint64_t> tr_seed;
  std::optional<std::size_t> tr_threads;
  CLI::App* tr = app.add_subcommand("train", "Train a model on a corpus");
  tr->add_option("--input", tr_input, "Corpus TSV")->required();
  tr->add_option("--vocab", tr_vocab, "Vocabulary file")->required();
  tr->add_option("--config", tr_config, "Training config (key = value lines)")
      ->required();
  tr->add_option("--out", tr_out, "Checkpoint file to write")->required();
  tr->add_option("--seed", tr_seed, "Override the config seed");
  tr->add_option("--threads", tr_threads, "Override the config thread count");

  // embed
  std::string em_ckpt, em_input, em_vocab, em_out;
  CLI::App* em = app.add_subcommand(
      "embed", "Embed every document of a corpus with a trained model");
  em->add_option("--ckpt", em_ckpt, "Checkpoint file")->required();
  em->add_option("--input", em_input, "Corpus TSV")->required();
  em->add_option("--vocab", em_vocab, "Vocabulary file used for training")
      ->required();
  em->add_option("--out", em_out, "Embedding file to write")->required();

  // eval
  std::string ev_emb, ev_out;
  std::vector<std::string> ev_labels;
  double ev_split = 0.5;
  std::uint64_t ev_seed = 0;
  CLI::App* ev = app.add_subcommand(
      "eval", "Linear-probe accuracy of embeddings against labels");
  ev->add_option("--emb", ev_emb, "Embedding file")->required();
  ev->add_option("--labels", ev_labels,
                 "Label TSV (doc_id<TAB>+1/-1); repeat per aspect")
      ->required();
  ev->add_option("--split", ev_split, "Training fraction (0,1)");
  ev->add_option("--seed", ev_seed, "Split shuffle seed");
  ev->add_option("--out", ev_out, "Optional results file");

  // gradcheck
  std::uint64_t gc_seed = 0;
  std::size_t gc_coords = 200;
  double gc_eps = 1e-5, gc_tol = 1e-4;
  CLI::App* gc = app.add_subcommand(
      "gradcheck",
      "Finite-difference verification of every gradient; exit 0 iff all "
      "checks pass");
  gc->add_option("--seed", gc_seed, "Fixture and coordinate-sampling seed");
  gc->add_option("--coords", gc_coords, "Coordinates per parameter block");
  gc->add_option("--eps", gc_eps, "Central-difference step");
  gc->add_option("--tol", gc_tol, "Error tolerance");

  // oracle
  std::string or_ckpt, or_input, or_vocab, or_doc, or_form = "standard";
  std::uint64_t or_seed = 0;
  std::size_t or_k = 1, or_r = 5;
  double or_alpha = 0.7;
  CLI::App* orc = app.add_subcommand(
      "oracle",
      "Dump every intermediate of one document's loss (token ids, sampled "
      "negatives, logits, context vectors before/after length adjustment, "
      "per-target and combined losses) as key<TAB>value lines");
  orc->add_option("--ckpt", or_ckpt, "Checkpoint file")->required();
  orc->add_option("--input", or_input, "Corpus TSV")->required();
  orc->add_option("--vocab", or_vocab, "Vocabulary file")->required();
  orc->add_option("--doc-id", or_doc, "Document id to dump")->required();
  orc->add_option("--seed", or_seed, "Negative-sampling seed");
  orc->add_option("--k", or_k, "Context half-width");
  orc->add_option("--r", or_r, "Negatives per target");
  orc->add_option("--alpha", or_alpha, "Context-loss weight");
  orc->add_option("--form", or_form, "Loss form: standard or literal");

  // synth
  std::uint64_t sy_seed = 0;
  std::size_t sy_docs = 2000, sy_aspects = 2;
  std::string sy_prefix;
  CLI::App* sy = app.add_subcommand(
      "synth",
      "Generate the labeled synthetic corpus (half lexical, half word-order "
      "sentiment)");
  sy->add_option("--seed", sy_seed, "Generator seed");
  sy->add_option("--docs", sy_docs, "Document count (multiple of 4)");
  sy->add_option("--aspects", sy_aspects, "Aspect count (1..5)");
  sy->add_option("--out-prefix", sy_prefix,
                 "Prefix for corpus.tsv, labels-<aspect>.tsv, subset.tsv")
      ->required();

  // sweep-alpha
  std::string sa_input, sa_vocab, sa_config, sa_alphas;
  std::vector<std::string> sa_labels;
  double sa_split = 0.5;
  std::uint64_t sa_eval_seed = 0;
  std::optional<std::uint64_t> sa_seed;
  std::optional<std::size_t> sa_threads;
  CLI::App* sa = app.add_subcommand(
      "sweep-alpha",
      "Train once per mixing weight and report linear-probe accuracies");
  sa->add_option("--alphas", sa_alphas, "Comma-separated weights, e.g. "
                                        "0,0.3,0.7,1")
      ->required();
  sa->add_option("--input", sa_input, "Corpus TSV")->required();
  sa->add_option("--vocab", sa_vocab, "Vocabulary file")->required();
  sa->add_option("--config", sa_config, "Training config")->required();
  sa->add_option("--labels", sa_labels, "Label TSV; repeat per aspect")
      ->required();
  sa->add_option("--split", sa_split, "Training fraction (0,1)");
  sa->add_option("--eval-seed", sa_eval_seed, "Split shuffle seed");
  sa->add_option("--seed", sa_seed, "Override the config seed");
  sa->add_option("--threads", sa_threads, "Override the config thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(bv))
      return cmd_build_vocab(bv_input, bv_min_count, bv_out);
    if (app.got_subcommand(tr))
      return cmd_train(tr_input, tr_vocab, tr_config, tr_out, tr_seed,
                       tr_threads);
    if (app.got_subcommand(em))
      return cmd_embed(em_ckpt, em_input, em_vocab, em_out);
    if (app.got_subcommand(ev))
      return cmd_eval(ev_emb, ev_labels, ev_split, ev_seed, ev_out);
    if (app.got_subcommand(gc))
      return cmd_gradcheck(gc_seed, gc_coords, gc_eps, gc_tol);
    if (app.got_subcommand(orc))
      return cmd_oracle(or_ckpt, or_input, or_vocab, or_doc, or_seed, or_k,
                        or_r, or_alpha, or_form);
    if (app.got_subcommand(sy))
      return cmd_synth(sy_seed, sy_docs, sy_aspects, sy_prefix);
    if (app.got_subcommand(sa))
      return cmd_sweep_alpha(sa_input, sa_vocab, sa_config, sa_alphas,
                             sa_labels, sa_split, sa_eval_seed, sa_seed,
                             sa_threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
