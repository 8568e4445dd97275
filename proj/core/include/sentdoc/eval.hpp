#ifndef SENTDOC_EVAL_HPP
#define SENTDOC_EVAL_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentdoc/rng.hpp"

namespace sentdoc {

/// Feature vectors with labels in {+1, -1}.
struct LabeledSet {
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const { return x.size(); }
};

enum class AspectLabel { positive, negative, excluded };

/// Score in [0,5] -> +1 at or above pos_threshold, -1 at or below
/// neg_threshold, excluded in between (both boundaries inclusive).
AspectLabel make_aspect_label(double score, double pos_threshold = 4.5,
                              double neg_threshold = 3.5);

struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
};

/// Primal hinge-loss SVM trained with Pegasos-style stochastic subgradient
/// steps (step size 1/(lambda*t), t counting all updates), shuffled each
/// epoch from the seed. Features are standardized with statistics of this
/// training set only; the returned (w, b) fold the standardization in, so
/// they apply directly to raw vectors.
SvmModel train_linear_svm(const LabeledSet& train, double lambda = 1e-4,
                          std::size_t epochs = 50, std::uint64_t seed = 0);

/// Fraction of sign(w.x + b) == label; sign(0) counts as +1.
double accuracy(const SvmModel& model, const LabeledSet& test);

/// Regularized hinge objective (lambda/2 |w|^2 + mean hinge) in the raw
/// feature space; used by the monotonicity property test.
double svm_objective(const SvmModel& model, const LabeledSet& data,
                     double lambda);

/// Diagnostics-only path that fits standardization statistics on a test
/// set. The library never calls it; tests assert its counter stays zero
/// during evaluation pipelines (no test-set leakage by construction).
void fit_standardizer_on_test_for_diagnostics(const LabeledSet& test);
std::uint64_t test_statistics_fit_count();
void reset_test_statistics_fit_count();

/// Per-aspect labels keyed by document id.
struct AspectLabels {
  std::string aspect;
  std::unordered_map<std::string, int> by_doc;  // +1 / -1
};

struct EvalResult {
  std::string aspect;
  double accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

/// Deterministic split + train + score for one aspect over embedded
/// documents. `split` is the training fraction (0 < split < 1); assignment
/// is a seeded shuffle of the labeled documents.
EvalResult evaluate_split(
    const std::vector<std::pair<std::string, std::vector<double>>>& embeddings,
    const AspectLabels& labels, double split, std::uint64_t seed);

/// Label file: `doc_id<TAB>label` lines with label +1/-1.
std::vector<std::pair<std::string, int>> load_labels(const std::string& path);
void save_labels(const std::vector<std::pair<std::string, int>>& labels,
                 const std::string& path);

/// Review scores, each in [0,5].
struct AspectScores {
  double appearance = 0.0;
  double aroma = 0.0;
  double palate = 0.0;
  double taste = 0.0;
  double overall = 0.0;
};

/// Score file: `doc_id<TAB>appearance<TAB>aroma<TAB>palate<TAB>taste<TAB>overall`.
std::vector<std::pair<std::string, AspectScores>> load_aspect_scores(
    const std::string& path);

/// Thresholds one score column into +1/-1 labels; documents whose score
/// falls between the thresholds are left out. `aspect` is one of
/// appearance, aroma, palate, taste, overall.
AspectLabels labels_from_scores(
    const std::vector<std::pair<std::string, AspectScores>>& scores,
    const std::string& aspect, double pos_threshold = 4.5,
    double neg_threshold = 3.5);

/// Results file: `aspect<TAB>accuracy` rows preceded by '#'-prefixed
/// metadata lines.
void save_results(const std::vector<EvalResult>& results,
                  const std::vector<std::string>& metadata,
                  const std::string& path);

}  // namespace sentdoc

#endif  // SENTDOC_EVAL_HPP
