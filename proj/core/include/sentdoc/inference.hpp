#ifndef SENTDOC_INFERENCE_HPP
#define SENTDOC_INFERENCE_HPP

#include <string>
#include <utility>
#include <vector>

#include "sentdoc/corpus.hpp"
#include "sentdoc/encoder.hpp"

namespace sentdoc {

/// Document representation: every sentence encoded with the context encoder
/// in infer mode (dropout inert), element-wise averaged, length adjusted.
/// This is exactly the adjusted context vector the document loss uses, so
/// no further training is involved. `which` defaults to the context encoder;
/// the candidate encoder is selectable for ablation runs.
NumArray embed_document(const ModelParams& model, const Document& doc,
                        const EncoderOptions& options = {},
                        Which which = Which::cntx);

/// Writes `#sentdoc-emb v1 dim=100 count=N` then one
/// `doc_id<TAB>v1 v2 ... v100` line per document in corpus order, floats as
/// shortest round-trip decimals. Returns the number of records written.
std::size_t embed_corpus(const ModelParams& model, const Corpus& corpus,
                         const std::string& out_path,
                         const EncoderOptions& options = {},
                         Which which = Which::cntx);

/// Reads the embedding file format back. Throws on malformed headers or
/// rows that do not match the declared dimension.
std::vector<std::pair<std::string, std::vector<double>>> load_embeddings(
    const std::string& path);

/// Shortest decimal string that parses back to exactly this double.
std::string format_double(double v);

}  // namespace sentdoc

#endif  // SENTDOC_INFERENCE_HPP
