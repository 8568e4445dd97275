#ifndef SENTDOC_SYNTHETIC_HPP
#define SENTDOC_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sentdoc/corpus.hpp"
#include "sentdoc/eval.hpp"

namespace sentdoc {

/// Desk-scale labeled corpus for the aspect experiments. Each document has
/// one sentence per aspect. Half of the documents carry a lexical sentiment
/// signal (a polarity-specific word), the other half an order-only signal:
/// the positive and negative sentences use exactly the same token multiset
/// and differ only in word order ("... smell is good" vs "... not good
/// smell", with a polarity-matched compensator token keeping the unigram
/// counts identical). Bag-of-words features therefore carry no class signal
/// on the order-dependent half. Labels are exactly balanced per aspect
/// within each half, which requires n_docs to be a multiple of 4.
struct SyntheticCorpus {
  Corpus corpus;
  std::vector<std::string> aspect_names;
  /// labels[a][d]: +1/-1 for document d on aspect a.
  std::vector<std::vector<int>> labels;
  /// True for documents whose sentiment is encoded only in word order.
  std::vector<bool> order_dependent;

  AspectLabels aspect_labels(std::size_t aspect) const;
};

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed,
                                          std::size_t n_docs,
                                          std::size_t aspects = 2);

/// Pre-segmented corpus record per document: tokens joined by spaces,
/// sentences joined by the 0x1F unit separator (round-trips through the
/// tokenizer unchanged).
void save_corpus_tsv(const Corpus& corpus, const std::string& path);

/// `doc_id<TAB>order|lexical` marker lines for the subset split.
void save_subset_markers(const SyntheticCorpus& synth,
                         const std::string& path);
std::vector<std::pair<std::string, bool>> load_subset_markers(
    const std::string& path);  // doc_id -> order_dependent

}  // namespace sentdoc

#endif  // SENTDOC_SYNTHETIC_HPP
