#include "sentdoc/inference.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sentdoc/objective.hpp"

namespace sentdoc {

NumArray embed_document(const ModelParams& model, const Document& doc,
                        const EncoderOptions& options, Which which) {
  if (doc.sentences.empty())
    throw std::invalid_argument("embed_document: document has no sentences");
  Rng unused(0);  // infer mode draws nothing
  std::vector<NumArray> vecs;
  vecs.reserve(doc.sentences.size());
  for (const Sentence& s : doc.sentences)
    vecs.push_back(encode(model, which, s, RunMode::infer, unused, options));
  return length_adjust(mean_vectors(vecs));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::size_t embed_corpus(const ModelParams& model, const Corpus& corpus,
                         const std::string& out_path,
                         const EncoderOptions& options, Which which) {
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << "#sentdoc-emb v1 dim=" << kOutputDim
      << " count=" << corpus.documents.size() << '\n';
  std::size_t written = 0;
  for (const Document& doc : corpus.documents) {
    const NumArray vec = embed_document(model, doc, options, which);
    out << doc.id << '\t';
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i) out << ' ';
      out << format_double(vec.data[i]);
    }
    out << '\n';
    if (!out) throw std::runtime_error("write failed: " + out_path);
    ++written;
  }
  return written;
}

std::vector<std::pair<std::string, std::vector<double>>> load_embeddings(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error(path + ": empty embedding file");
  std::size_t dim = 0;
  {
    std::istringstream hs(header);
    std::string tag, version, dim_field;
    hs >> tag >> version >> dim_field;
    if (tag != "#sentdoc-emb" || version != "v1" ||
        dim_field.rfind("dim=", 0) != 0)
      throw std::runtime_error(path + ": bad embedding header '" + header +
                               "'");
    dim = static_cast<std::size_t>(std::stoull(dim_field.substr(4)));
  }
  std::vector<std::pair<std::string, std::vector<double>>> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected doc_id<TAB>values");
    std::vector<double> vec;
    vec.reserve(dim);
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{})
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": bad float value");
      vec.push_back(v);
      p = res.ptr;
    }
    if (vec.size() != dim)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               std::to_string(vec.size()) +
                               " values, expected " + std::to_string(dim));
    out.emplace_back(line.substr(0, tab), std::move(vec));
  }
  return out;
}

}  // namespace sentdoc
