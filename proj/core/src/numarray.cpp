#include "sentdoc/numarray.hpp"

#include <atomic>
#include <cmath>

namespace sentdoc {

namespace {
std::atomic<bool> g_checked{false};
}

NumArray::NumArray(std::initializer_list<std::size_t> s, double fill) : shape(s) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  data.assign(n, fill);
}

NumArray::NumArray(const std::vector<std::size_t>& s, double fill) : shape(s) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  data.assign(n, fill);
}

NumArray NumArray::scalar(double v) {
  NumArray a;
  a.shape = {1};
  a.data = {v};
  return a;
}

NumArray NumArray::vector_of(std::initializer_list<double> values) {
  NumArray a;
  a.shape = {values.size()};
  a.data.assign(values.begin(), values.end());
  return a;
}

NumArray NumArray::matrix_of(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  if (values.size() != rows * cols) throw std::invalid_argument("matrix_of: element count mismatch");
  NumArray a;
  a.shape = {rows, cols};
  a.data.assign(values.begin(), values.end());
  return a;
}

bool NumArray::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void NumArray::quantize_f32() {
  for (double& v : data) v = static_cast<double>(static_cast<float>(v));
}

std::string shape_string(const NumArray& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(a.shape[i]);
  }
  return s + "]";
}

void set_checked_mode(bool enabled) noexcept { g_checked.store(enabled, std::memory_order_relaxed); }
bool checked_mode() noexcept { return g_checked.load(std::memory_order_relaxed); }

void require_finite(const NumArray& a, const char* where) {
  if (!checked_mode()) return;
  if (!a.all_finite()) throw std::runtime_error(std::string(where) + ": non-finite value in input");
}

double dot_n(const double* a, const double* b, std::size_t n) {
  // 16 independent accumulators: four 4-wide SIMD groups in flight, so the
  // reduction is throughput-bound instead of FMA-latency-bound. The combine
  // order below is fixed; the result is identical on every call site.
  double acc[16] = {0.0};
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16)
    for (std::size_t j = 0; j < 16; ++j) acc[j] += a[i + j] * b[i + j];
  double g0 = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  double g1 = (acc[4] + acc[5]) + (acc[6] + acc[7]);
  double g2 = (acc[8] + acc[9]) + (acc[10] + acc[11]);
  double g3 = (acc[12] + acc[13]) + (acc[14] + acc[15]);
  double out = (g0 + g1) + (g2 + g3);
  for (; i < n; ++i) out += a[i] * b[i];
  return out;
}

void axpy_n(double alpha, const double* __restrict x, double* __restrict y,
            std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace sentdoc
