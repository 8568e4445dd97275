#include "sentdoc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sentdoc {

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::int32_t Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id.find(token);
  return it == token_to_id.end() ? kUnkId : it->second;
}

std::vector<std::string> segment_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminator(text[i])) continue;
    const bool at_end = i + 1 == text.size();
    if (at_end || is_space(text[i + 1])) {
      std::string piece = trim(text.substr(start, i + 1 - start));
      if (!piece.empty()) out.push_back(std::move(piece));
      start = i + 1;
    }
  }
  if (start < text.size()) {
    std::string piece = trim(text.substr(start));
    if (!piece.empty()) out.push_back(std::move(piece));
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> out;
  std::string current;
  for (char c : sentence) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<RawDocument> read_raw_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected doc_id<TAB>text");
    RawDocument doc;
    doc.id = line.substr(0, tab);
    const std::string body = line.substr(tab + 1);
    if (body.find('\x1f') != std::string::npos) {
      // Pre-segmented record: sentences joined by the unit separator byte.
      std::size_t start = 0;
      while (start <= body.size()) {
        const std::size_t us = body.find('\x1f', start);
        const std::string piece = trim(
            us == std::string::npos ? body.substr(start)
                                    : body.substr(start, us - start));
        if (!piece.empty()) doc.sentences.push_back(piece);
        if (us == std::string::npos) break;
        start = us + 1;
      }
    } else {
      doc.sentences = segment_sentences(body);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

Vocabulary build_vocabulary(const std::vector<RawDocument>& docs,
                            std::uint64_t min_count) {
  if (min_count < 1)
    throw std::invalid_argument("build_vocabulary: min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const RawDocument& doc : docs)
    for (const std::string& sent : doc.sentences)
      for (std::string& tok : tokenize(sent)) ++freq[std::move(tok)];

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [tok, n] : freq)
    if (n >= min_count) kept.emplace_back(tok, n);
  if (kept.empty())
    throw std::runtime_error(
        "build_vocabulary: no token reaches min_count; vocabulary would be "
        "empty");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.id_to_token = {"<pad>", "<unk>"};
  v.counts = {0, 0};
  for (const auto& [tok, n] : kept) {
    v.token_to_id.emplace(tok, static_cast<std::int32_t>(v.id_to_token.size()));
    v.id_to_token.push_back(tok);
    v.counts.push_back(n);
  }
  return v;
}

Corpus encode_corpus(const std::vector<RawDocument>& docs,
                     const Vocabulary& vocab) {
  Corpus c;
  c.vocab = vocab;
  for (const RawDocument& raw : docs) {
    Document doc;
    doc.id = raw.id;
    for (const std::string& sent : raw.sentences) {
      Sentence ids;
      for (const std::string& tok : tokenize(sent))
        ids.push_back(vocab.id_of(tok));
      if (!ids.empty()) doc.sentences.push_back(std::move(ids));
    }
    if (doc.sentences.empty()) {
      ++c.dropped_documents;
      continue;
    }
    c.documents.push_back(std::move(doc));
  }
  rebuild_sentence_index(c);
  return c;
}

void rebuild_sentence_index(Corpus& corpus) {
  corpus.sentence_index.clear();
  corpus.doc_first_sentence.clear();
  for (std::uint32_t di = 0; di < corpus.documents.size(); ++di) {
    corpus.doc_first_sentence.push_back(corpus.sentence_index.size());
    const std::size_t n = corpus.documents[di].sentences.size();
    for (std::uint32_t si = 0; si < n; ++si)
      corpus.sentence_index.emplace_back(di, si);
  }
  corpus.doc_first_sentence.push_back(corpus.sentence_index.size());
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> sample_negatives(
    const Corpus& corpus, std::size_t exclude_doc, std::size_t r, Rng& rng) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  if (r == 0) return out;
  // sentence_index is contiguous per document, so the excluded document is
  // one block [begin, end) that eligible draws skip over in O(1).
  std::size_t begin = 0;
  std::size_t excluded = 0;
  if (exclude_doc + 1 < corpus.doc_first_sentence.size()) {
    begin = corpus.doc_first_sentence[exclude_doc];
    excluded = corpus.doc_first_sentence[exclude_doc + 1] - begin;
  }
  const std::size_t eligible = corpus.sentence_index.size() - excluded;
  if (eligible == 0)
    throw std::runtime_error(
        "sample_negatives: no sentence outside the excluded document");
  out.reserve(r);
  for (std::size_t i = 0; i < r; ++i) {
    std::size_t u = static_cast<std::size_t>(rng.uniform_int(eligible));
    if (u >= begin) u += excluded;
    out.push_back(corpus.sentence_index[u]);
  }
  return out;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t id = 2; id < vocab.id_to_token.size(); ++id)
    out << vocab.id_to_token[id] << '\t' << vocab.counts[id] << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  Vocabulary v;
  v.id_to_token = {"<pad>", "<unk>"};
  v.counts = {0, 0};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected token<TAB>count");
    const std::string tok = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": bad count field");
    }
    v.token_to_id.emplace(tok, static_cast<std::int32_t>(v.id_to_token.size()));
    v.id_to_token.push_back(tok);
    v.counts.push_back(count);
  }
  return v;
}

}  // namespace sentdoc
