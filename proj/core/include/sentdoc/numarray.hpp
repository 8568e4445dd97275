#ifndef SENTDOC_NUMARRAY_HPP
#define SENTDOC_NUMARRAY_HPP

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace sentdoc {

/// Dense row-major array of doubles. Shapes are explicit; there is no
/// broadcasting. Gradient checks run these at full 64-bit precision;
/// checkpoints store the values rounded through 32-bit floats.
struct NumArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  NumArray() = default;
  NumArray(std::initializer_list<std::size_t> s, double fill = 0.0);
  explicit NumArray(const std::vector<std::size_t>& s, double fill = 0.0);

  static NumArray zeros(std::initializer_list<std::size_t> s) { return NumArray(s, 0.0); }
  static NumArray zeros(const std::vector<std::size_t>& s) { return NumArray(s, 0.0); }
  static NumArray scalar(double v);
  static NumArray vector_of(std::initializer_list<double> values);
  static NumArray matrix_of(std::size_t rows, std::size_t cols, std::initializer_list<double> values);

  std::size_t size() const { return data.size(); }
  std::size_t ndim() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double& at(std::size_t i) { return data[i]; }
  double at(std::size_t i) const { return data[i]; }
  double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  bool same_shape(const NumArray& other) const { return shape == other.shape; }
  bool all_finite() const;

  /// Round every element through a 32-bit float. Used by 32-bit precision
  /// training so in-memory parameters match the checkpoint encoding exactly.
  void quantize_f32();
};

std::string shape_string(const NumArray& a);

/// Enables finiteness validation of operation inputs (NaN/Inf rejected at
/// operation boundaries). Off by default; tests and checked training turn
/// it on.
void set_checked_mode(bool enabled) noexcept;
bool checked_mode() noexcept;

/// Throws if checked mode is on and `a` holds a NaN or Inf.
void require_finite(const NumArray& a, const char* where);

// Hot kernels. `dot_n` uses four fixed accumulators so the reduction order
// is deterministic while still pipelining; `axpy_n` is a plain fused loop.
double dot_n(const double* a, const double* b, std::size_t n);
void axpy_n(double alpha, const double* x, double* y, std::size_t n);

}  // namespace sentdoc

#endif  // SENTDOC_NUMARRAY_HPP
