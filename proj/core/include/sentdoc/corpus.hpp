#ifndef SENTDOC_CORPUS_HPP
#define SENTDOC_CORPUS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sentdoc/rng.hpp"

namespace sentdoc {

constexpr std::int32_t kPadId = 0;
constexpr std::int32_t kUnkId = 1;

/// Token/id mapping with reserved ids PAD=0 and UNK=1. Content ids start
/// at 2, assigned in descending corpus frequency (ties lexicographic).
struct Vocabulary {
  std::unordered_map<std::string, std::int32_t> token_to_id;
  std::vector<std::string> id_to_token;  // index = id; [0]="<pad>", [1]="<unk>"
  std::vector<std::uint64_t> counts;     // parallel to id_to_token; 0 for PAD/UNK

  std::size_t size() const { return id_to_token.size(); }
  std::int32_t id_of(const std::string& token) const;  // UNK when absent
};

using Sentence = std::vector<std::int32_t>;

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocab;
  /// Every (document index, sentence index) pair exactly once, in document
  /// order. Contiguous per document, which makes excluded-document sampling
  /// a constant-time index skip.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sentence_index;
  /// doc_first_sentence[d] = position of document d's first sentence in
  /// sentence_index; one trailing entry holds the total sentence count.
  std::vector<std::size_t> doc_first_sentence;
  std::size_t dropped_documents = 0;  // ingested docs with zero sentences

  std::size_t total_sentences() const { return sentence_index.size(); }
};

/// Splits on '.', '!' or '?' followed by whitespace or end of text; trims
/// surrounding whitespace, keeps the punctuation, drops empty pieces.
std::vector<std::string> segment_sentences(const std::string& text);

/// Lowercases (ASCII) and splits on maximal runs of non-alphanumeric bytes.
std::vector<std::string> tokenize(const std::string& sentence);

struct RawDocument {
  std::string id;
  std::vector<std::string> sentences;  // raw sentence strings
};

/// Reads `doc_id<TAB>text` lines (text sentence-segmented here) or the
/// pre-segmented variant `doc_id<TAB>sent1<US>sent2...` with US = 0x1F.
std::vector<RawDocument> read_raw_corpus(const std::string& path);

/// Frequency-ordered vocabulary over the tokenized documents; tokens seen
/// fewer than min_count times are left to UNK. Throws when nothing survives.
Vocabulary build_vocabulary(const std::vector<RawDocument>& docs,
                            std::uint64_t min_count);

/// Maps tokens to ids (UNK for out-of-vocabulary), drops empty sentences and
/// then documents left with zero sentences (counted in dropped_documents).
Corpus encode_corpus(const std::vector<RawDocument>& docs,
                     const Vocabulary& vocab);

/// Recomputes sentence_index and doc_first_sentence from documents. For
/// corpora assembled directly (e.g. the synthetic generator).
void rebuild_sentence_index(Corpus& corpus);

/// r uniform draws (with replacement) over sentence_index entries whose
/// document differs from exclude_doc. Throws when r > 0 and nothing is
/// eligible.
std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_negatives(
    const Corpus& corpus, std::size_t exclude_doc, std::size_t r, Rng& rng);

/// Vocabulary file: `token<TAB>count` lines, line order = id order from 2.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace sentdoc

#endif  // SENTDOC_CORPUS_HPP
