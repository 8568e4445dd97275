#ifndef SENTDOC_TAPE_HPP
#define SENTDOC_TAPE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "sentdoc/numarray.hpp"
#include "sentdoc/rng.hpp"

namespace sentdoc {

enum class RunMode { train, infer };
enum class Activation { none, relu };

/// Reverse-mode tape. Operations execute their forward pass eagerly as
/// nodes are recorded; backward() replays the recorded closures in exact
/// reverse order, accumulating gradients additively. One tape per
/// document/step; tapes are single-threaded.
class Tape {
 public:
  struct Var {
    std::int32_t idx = -1;
    bool valid() const { return idx >= 0; }
  };

  /// Registers an externally owned array (model parameter). The array must
  /// outlive the tape. Its gradient is read back after backward().
  Var leaf(const NumArray& external);

  /// Registers a tape-owned value. Used by op builders.
  Var node(NumArray value);

  /// Attaches the backward rule for v. The rule reads maybe_grad(v) and
  /// accumulates into the grad_slot of each of its inputs.
  void set_back(Var v, std::function<void(Tape&)> back);

  const NumArray& value(Var v) const;
  /// Gradient accumulated for v, or nullptr if backward never touched it.
  const NumArray* maybe_grad(Var v) const;
  /// Gradient slot for v, allocating zeros on first use.
  NumArray& grad_slot(Var v);
  bool has_grad(Var v) const;

  /// Seeds d(root)/d(root)=1 and walks nodes in reverse recording order.
  /// root must hold exactly one element.
  void backward(Var root);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    NumArray owned;
    const NumArray* external = nullptr;
    NumArray grad;
    bool grad_set = false;
    std::function<void(Tape&)> back;
  };
  std::vector<Node> nodes_;
};

// Differentiable operations. Shapes follow the comments; every operation
// validates its preconditions and throws std::invalid_argument on misuse.

/// table [VxD], ids with each id < V -> [TxD]; backward scatters row
/// gradients into the table (accumulating over repeated ids).
Tape::Var embedding_lookup(Tape& t, Tape::Var table, const std::vector<std::int32_t>& ids);

/// input [TxCin], filters [Cout x w x Cin], bias [Cout] -> [(T-w+1) x Cout].
/// Valid convolution, stride 1; requires T >= w.
Tape::Var conv1d_valid(Tape& t, Tape::Var input, Tape::Var filters, Tape::Var bias);

/// input [TxC] -> [floor(T/2) x C], window 2 stride 2; a trailing odd row is
/// dropped; gradient goes to the argmax (first index on ties). Requires T>=2.
Tape::Var maxpool1d(Tape& t, Tape::Var input);

/// input [TxC] -> [C], arithmetic mean over rows. Requires T >= 1.
Tape::Var global_avg_pool(Tape& t, Tape::Var input);

/// input [m], weight [nxm], bias [n] -> [n]; out = act(Wx + b).
/// ReLU gradient is 0 where the pre-activation is <= 0.
Tape::Var dense(Tape& t, Tape::Var input, Tape::Var weight, Tape::Var bias, Activation act);

/// Inverted dropout. infer mode is an exact identity; train mode zeroes each
/// element with probability `rate` and scales survivors by 1/(1-rate).
/// rate must lie in [0,1). Train mode always consumes one draw per element.
Tape::Var dropout(Tape& t, Tape::Var input, double rate, RunMode mode, Rng& rng);

/// Inner product of two equal-length vectors -> scalar [1].
Tape::Var dot(Tape& t, Tape::Var a, Tape::Var b);

// Glue used by the encoder and the loss terms.
Tape::Var relu(Tape& t, Tape::Var x);
Tape::Var add(Tape& t, Tape::Var a, Tape::Var b);
Tape::Var scale(Tape& t, Tape::Var x, double c);
Tape::Var negate(Tape& t, Tape::Var x);
/// Elementwise mean of equally shaped vars, summed in list order.
Tape::Var mean_of(Tape& t, const std::vector<Tape::Var>& vs);
/// Sum of scalar vars in list order -> [1].
Tape::Var sum_scalars(Tape& t, const std::vector<Tape::Var>& vs);
/// L2 norm -> [1]. Backward assumes a nonzero norm.
Tape::Var norm2(Tape& t, Tape::Var x);
/// x * s[0] where s is a scalar var.
Tape::Var scale_by_scalar(Tape& t, Tape::Var x, Tape::Var s);
/// a[0] / b[0] -> [1].
Tape::Var div_scalars(Tape& t, Tape::Var a, Tape::Var b);
/// Numerically stable log(1+exp(x)), elementwise.
Tape::Var softplus(Tape& t, Tape::Var x);

/// The scalar formula the softplus op applies: max(x,0) + log1p(exp(-|x|)).
double softplus_value(double x);

}  // namespace sentdoc

#endif  // SENTDOC_TAPE_HPP
