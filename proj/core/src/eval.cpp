#include "sentdoc/eval.hpp"

#include "sentdoc/numarray.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace sentdoc {

namespace {

std::atomic<std::uint64_t> g_test_fits{0};

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> inv_std;
};

Standardizer fit_standardizer(const LabeledSet& data) {
  const std::size_t dim = data.x.front().size();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.inv_std.assign(dim, 1.0);
  for (const auto& row : data.x)
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += row[j];
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (double& m : s.mean) m *= inv_n;
  std::vector<double> var(dim, 0.0);
  for (const auto& row : data.x)
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = row[j] - s.mean[j];
      var[j] += d * d;
    }
  for (std::size_t j = 0; j < dim; ++j) {
    const double sd = std::sqrt(var[j] * inv_n);
    s.inv_std[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return s;
}

void validate_set(const LabeledSet& data, const char* where) {
  if (data.x.empty()) throw std::invalid_argument(std::string(where) + ": empty set");
  if (data.x.size() != data.y.size())
    throw std::invalid_argument(std::string(where) +
                                ": feature/label count mismatch");
  const std::size_t dim = data.x.front().size();
  for (const auto& row : data.x)
    if (row.size() != dim)
      throw std::invalid_argument(std::string(where) +
                                  ": inconsistent feature dimension");
  for (int label : data.y)
    if (label != 1 && label != -1)
      throw std::invalid_argument(std::string(where) +
                                  ": labels must be +1 or -1");
}

}  // namespace

AspectLabel make_aspect_label(double score, double pos_threshold,
                              double neg_threshold) {
  if (!(score >= 0.0 && score <= 5.0))
    throw std::invalid_argument("make_aspect_label: score outside [0,5]");
  if (score >= pos_threshold) return AspectLabel::positive;
  if (score <= neg_threshold) return AspectLabel::negative;
  return AspectLabel::excluded;
}

SvmModel train_linear_svm(const LabeledSet& train, double lambda,
                          std::size_t epochs, std::uint64_t seed) {
  validate_set(train, "train_linear_svm");
  if (!(lambda > 0.0))
    throw std::invalid_argument("train_linear_svm: lambda must be > 0");
  const bool has_pos = std::find(train.y.begin(), train.y.end(), 1) !=
                       train.y.end();
  const bool has_neg = std::find(train.y.begin(), train.y.end(), -1) !=
                       train.y.end();
  if (!has_pos || !has_neg)
    throw std::invalid_argument(
        "train_linear_svm: both classes must be present");

  const std::size_t n = train.size();
  const std::size_t dim = train.x.front().size();
  const Standardizer st = fit_standardizer(train);
  std::vector<std::vector<double>> z(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      z[i][j] = (train.x[i][j] - st.mean[j]) * st.inv_std[j];

  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t t = 1;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    fisher_yates(order, rng);
    for (std::size_t idx : order) {
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double margin =
          static_cast<double>(train.y[idx]) *
          (dot_n(w.data(), z[idx].data(), dim) + b);
      const double shrink = 1.0 - eta * lambda;
      for (double& wj : w) wj *= shrink;
      if (margin < 1.0) {
        const double step = eta * static_cast<double>(train.y[idx]);
        const std::vector<double>& zi = z[idx];
        for (std::size_t j = 0; j < dim; ++j) w[j] += step * zi[j];
        b += step;  // bias unregularized
      }
      ++t;
    }
  }

  // Fold the standardization into the returned parameters so they apply to
  // raw features: w'_j = w_j/sd_j, b' = b - sum_j w_j*mean_j/sd_j.
  SvmModel model;
  model.w.assign(dim, 0.0);
  model.b = b;
  for (std::size_t j = 0; j < dim; ++j) {
    model.w[j] = w[j] * st.inv_std[j];
    model.b -= w[j] * st.inv_std[j] * st.mean[j];
  }
  return model;
}

double accuracy(const SvmModel& model, const LabeledSet& test) {
  validate_set(test, "accuracy");
  if (test.x.front().size() != model.w.size())
    throw std::invalid_argument("accuracy: feature dimension mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double score = dot_n(model.w.data(), test.x[i].data(), model.w.size()) + model.b;
    const int pred = score >= 0.0 ? 1 : -1;  // sign(0) counts as +1
    if (pred == test.y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double svm_objective(const SvmModel& model, const LabeledSet& data,
                     double lambda) {
  validate_set(data, "svm_objective");
  if (data.x.front().size() != model.w.size())
    throw std::invalid_argument("svm_objective: feature dimension mismatch");
  double hinge = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double margin = static_cast<double>(data.y[i]) *
                          (dot_n(model.w.data(), data.x[i].data(), model.w.size()) + model.b);
    hinge += std::max(0.0, 1.0 - margin);
  }
  hinge /= static_cast<double>(data.size());
  double norm2 = 0.0;
  for (double wj : model.w) norm2 += wj * wj;
  return 0.5 * lambda * norm2 + hinge;
}

void fit_standardizer_on_test_for_diagnostics(const LabeledSet& test) {
  validate_set(test, "fit_standardizer_on_test_for_diagnostics");
  g_test_fits.fetch_add(1, std::memory_order_relaxed);
  (void)fit_standardizer(test);
}

std::uint64_t test_statistics_fit_count() {
  return g_test_fits.load(std::memory_order_relaxed);
}
void reset_test_statistics_fit_count() { g_test_fits.store(0); }

EvalResult evaluate_split(
    const std::vector<std::pair<std::string, std::vector<double>>>& embeddings,
    const AspectLabels& labels, double split, std::uint64_t seed) {
  if (!(split > 0.0 && split < 1.0))
    throw std::invalid_argument("evaluate_split: split must lie in (0,1)");
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    if (labels.by_doc.count(embeddings[i].first)) labeled.push_back(i);
  if (labeled.size() < 4)
    throw std::invalid_argument(
        "evaluate_split: need at least 4 labeled documents");

  Rng rng = Rng(seed).stream({label_hash("eval-split"),
                              label_hash(labels.aspect)});
  fisher_yates(labeled, rng);
  const std::size_t n_train = static_cast<std::size_t>(
      static_cast<double>(labeled.size()) * split);

  LabeledSet train, test;
  for (std::size_t pos = 0; pos < labeled.size(); ++pos) {
    const auto& [doc_id, vec] = embeddings[labeled[pos]];
    LabeledSet& dst = pos < n_train ? train : test;
    dst.x.push_back(vec);
    dst.y.push_back(labels.by_doc.at(doc_id));
  }

  // Long Pegasos schedule: mixed-signal unions (several cluster pairs per
  // class) need far more passes to place the boundary than either cluster
  // family alone; at these feature sizes the cost is negligible.
  const SvmModel model = train_linear_svm(train, 1e-4, 1600, seed);
  EvalResult result;
  result.aspect = labels.aspect;
  result.accuracy = accuracy(model, test);
  result.train_size = train.size();
  result.test_size = test.size();
  return result;
}

std::vector<std::pair<std::string, int>> load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open label file: " + path);
  std::vector<std::pair<std::string, int>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected doc_id<TAB>label");
    const std::string value = line.substr(tab + 1);
    int label = 0;
    if (value == "+1" || value == "1") {
      label = 1;
    } else if (value == "-1") {
      label = -1;
    } else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": label must be +1 or -1, got '" + value +
                               "'");
    }
    out.emplace_back(line.substr(0, tab), label);
  }
  return out;
}

void save_labels(const std::vector<std::pair<std::string, int>>& labels,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& [doc_id, label] : labels)
    out << doc_id << '\t' << (label > 0 ? "+1" : "-1") << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<std::string, AspectScores>> load_aspect_scores(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open score file: " + path);
  std::vector<std::pair<std::string, AspectScores>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(
          start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 6)
      throw std::runtime_error(
          where +
          ": expected doc_id and five tab-separated scores, got " +
          std::to_string(fields.size()) + " fields");
    AspectScores s;
    double* slots[5] = {&s.appearance, &s.aroma, &s.palate, &s.taste,
                        &s.overall};
    for (std::size_t i = 0; i < 5; ++i) {
      std::size_t pos = 0;
      double value = 0.0;
      try {
        value = std::stod(fields[i + 1], &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != fields[i + 1].size() || fields[i + 1].empty())
        throw std::runtime_error(where + ": bad score '" + fields[i + 1] +
                                 "'");
      if (!(value >= 0.0 && value <= 5.0))
        throw std::runtime_error(where + ": score " + fields[i + 1] +
                                 " outside [0,5]");
      *slots[i] = value;
    }
    out.emplace_back(fields[0], s);
  }
  return out;
}

AspectLabels labels_from_scores(
    const std::vector<std::pair<std::string, AspectScores>>& scores,
    const std::string& aspect, double pos_threshold, double neg_threshold) {
  double AspectScores::* member = nullptr;
  if (aspect == "appearance") member = &AspectScores::appearance;
  else if (aspect == "aroma") member = &AspectScores::aroma;
  else if (aspect == "palate") member = &AspectScores::palate;
  else if (aspect == "taste") member = &AspectScores::taste;
  else if (aspect == "overall") member = &AspectScores::overall;
  else
    throw std::invalid_argument(
        "labels_from_scores: unknown aspect '" + aspect +
        "' (expected appearance, aroma, palate, taste or overall)");
  AspectLabels out;
  out.aspect = aspect;
  for (const auto& [doc_id, s] : scores) {
    const AspectLabel label =
        make_aspect_label(s.*member, pos_threshold, neg_threshold);
    if (label == AspectLabel::positive) out.by_doc.emplace(doc_id, 1);
    else if (label == AspectLabel::negative) out.by_doc.emplace(doc_id, -1);
  }
  return out;
}

void save_results(const std::vector<EvalResult>& results,
                  const std::vector<std::string>& metadata,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (const std::string& line : metadata) out << "# " << line << '\n';
  char buf[64];
  for (const EvalResult& r : results) {
    std::snprintf(buf, sizeof(buf), "%.6f", r.accuracy);
    out << r.aspect << '\t' << buf << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace sentdoc
