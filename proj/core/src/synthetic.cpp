#include "sentdoc/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sentdoc/rng.hpp"

namespace sentdoc {

namespace {

const std::vector<std::string> kAspectNames = {"smell", "taste", "look",
                                               "feel", "sound"};
const std::vector<std::string> kFillers = {
    "the", "it",   "a",    "really", "quite", "so",
    "very", "rather", "just", "still",  "too",   "also"};
const std::vector<std::string> kPositiveWords = {"wonderful", "superb",
                                                 "fantastic", "delightful"};
const std::vector<std::string> kNegativeWords = {"awful", "dreadful",
                                                 "horrid", "nasty"};

std::vector<std::string> draw_fillers(Rng& rng) {
  const std::size_t count = 2 + static_cast<std::size_t>(rng.uniform_int(3));
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(kFillers[rng.uniform_int(kFillers.size())]);
  return out;
}

/// Balanced +1/-1 assignment for one aspect within one half of the corpus.
std::vector<int> balanced_labels(std::size_t count, Rng rng) {
  std::vector<int> labels(count, 1);
  for (std::size_t i = count / 2; i < count; ++i) labels[i] = -1;
  fisher_yates(labels, rng);
  return labels;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

AspectLabels SyntheticCorpus::aspect_labels(std::size_t aspect) const {
  if (aspect >= aspect_names.size())
    throw std::invalid_argument("aspect index out of range");
  AspectLabels out;
  out.aspect = aspect_names[aspect];
  for (std::size_t d = 0; d < corpus.documents.size(); ++d)
    out.by_doc.emplace(corpus.documents[d].id, labels[aspect][d]);
  return out;
}

SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed,
                                          std::size_t n_docs,
                                          std::size_t aspects) {
  if (n_docs < 20)
    throw std::invalid_argument(
        "generate_synthetic_corpus: need at least 20 documents");
  if (n_docs % 4 != 0)
    throw std::invalid_argument(
        "generate_synthetic_corpus: n_docs must be a multiple of 4 (labels "
        "are balanced exactly within both the lexical and the order-dependent "
        "halves)");
  if (aspects < 1 || aspects > kAspectNames.size())
    throw std::invalid_argument(
        "generate_synthetic_corpus: aspects must lie in [1," +
        std::to_string(kAspectNames.size()) + "]");

  const Rng master(seed);
  SyntheticCorpus synth;
  synth.aspect_names.assign(kAspectNames.begin(),
                            kAspectNames.begin() + aspects);

  // Even document indices carry the lexical signal, odd ones the word-order
  // signal; each half gets an exactly balanced, independently shuffled label
  // sequence per aspect.
  const std::size_t half = n_docs / 2;
  std::vector<std::vector<int>> lexical_labels(aspects);
  std::vector<std::vector<int>> order_labels(aspects);
  for (std::size_t a = 0; a < aspects; ++a) {
    lexical_labels[a] =
        balanced_labels(half, master.stream({label_hash("labels"), a, 0}));
    order_labels[a] =
        balanced_labels(half, master.stream({label_hash("labels"), a, 1}));
  }

  synth.labels.assign(aspects, std::vector<int>(n_docs, 0));
  synth.order_dependent.assign(n_docs, false);

  std::vector<RawDocument> raw;
  raw.reserve(n_docs);
  for (std::size_t d = 0; d < n_docs; ++d) {
    const bool order_doc = (d % 2) == 1;
    synth.order_dependent[d] = order_doc;
    RawDocument doc;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "doc%05zu", d);
    doc.id = idbuf;
    for (std::size_t a = 0; a < aspects; ++a) {
      const int label = order_doc ? order_labels[a][d / 2]
                                  : lexical_labels[a][d / 2];
      synth.labels[a][d] = label;
      Rng rng = master.stream({label_hash("fill"), d, a});
      std::vector<std::string> fillers = draw_fillers(rng);
      const std::string& aspect_word = kAspectNames[a];
      std::vector<std::string> tokens;
      if (order_doc) {
        // Same unigram multiset for both polarities; only the order tells
        // them apart. The leading token compensates the pattern word the
        // other polarity uses.
        if (label > 0) {
          tokens.push_back("not");
          tokens.insert(tokens.end(), fillers.begin(), fillers.end());
          tokens.insert(tokens.end(), {aspect_word, "is", "good"});
        } else {
          tokens.push_back("is");
          tokens.insert(tokens.end(), fillers.begin(), fillers.end());
          tokens.insert(tokens.end(), {"not", "good", aspect_word});
        }
      } else {
        // The polarity word opens and closes the sentence so the signal
        // survives averaging over the whole document; a single filler keeps
        // within-class scatter far below the class separation.
        const auto& words = label > 0 ? kPositiveWords : kNegativeWords;
        const std::string word = words[rng.uniform_int(words.size())];
        tokens.push_back(word);
        tokens.push_back(fillers.front());
        tokens.insert(tokens.end(), {aspect_word, "is", word});
      }
      doc.sentences.push_back(join(tokens));
    }
    raw.push_back(std::move(doc));
  }

  const Vocabulary vocab = build_vocabulary(raw, 1);
  synth.corpus = encode_corpus(raw, vocab);
  if (synth.corpus.documents.size() != n_docs)
    throw std::logic_error(
        "generate_synthetic_corpus: generator dropped documents");
  return synth;
}

void save_corpus_tsv(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const Document& doc : corpus.documents) {
    out << doc.id << '\t';
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      if (s) out << '\x1f';
      const Sentence& sent = doc.sentences[s];
      for (std::size_t i = 0; i < sent.size(); ++i) {
        if (i) out << ' ';
        out << corpus.vocab.id_to_token.at(
            static_cast<std::size_t>(sent[i]));
      }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_subset_markers(const SyntheticCorpus& synth,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t d = 0; d < synth.corpus.documents.size(); ++d)
    out << synth.corpus.documents[d].id << '\t'
        << (synth.order_dependent[d] ? "order" : "lexical") << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<std::string, bool>> load_subset_markers(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open subset file: " + path);
  std::vector<std::pair<std::string, bool>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    const std::string kind =
        tab == std::string::npos ? "" : line.substr(tab + 1);
    if (kind != "order" && kind != "lexical")
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected doc_id<TAB>order|lexical");
    out.emplace_back(line.substr(0, tab), kind == "order");
  }
  return out;
}

}  // namespace sentdoc
