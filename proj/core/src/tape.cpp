#include "sentdoc/tape.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sentdoc {

namespace {

[[noreturn]] void fail(const std::string& op, const std::string& what) {
  throw std::invalid_argument(op + ": " + what);
}

void check_valid(const Tape::Var& v, const char* op) {
  if (!v.valid()) fail(op, "invalid var handle");
}

}  // namespace

Tape::Var Tape::leaf(const NumArray& external) {
  Node n;
  n.external = &external;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

Tape::Var Tape::node(NumArray value) {
  require_finite(value, "tape node");
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

void Tape::set_back(Var v, std::function<void(Tape&)> back) {
  nodes_.at(static_cast<std::size_t>(v.idx)).back = std::move(back);
}

const NumArray& Tape::value(Var v) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(v.idx));
  return n.external ? *n.external : n.owned;
}

const NumArray* Tape::maybe_grad(Var v) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(v.idx));
  return n.grad_set ? &n.grad : nullptr;
}

bool Tape::has_grad(Var v) const {
  return nodes_.at(static_cast<std::size_t>(v.idx)).grad_set;
}

NumArray& Tape::grad_slot(Var v) {
  Node& n = nodes_.at(static_cast<std::size_t>(v.idx));
  if (!n.grad_set) {
    const NumArray& val = n.external ? *n.external : n.owned;
    n.grad = NumArray::zeros(val.shape);
    n.grad_set = true;
  }
  return n.grad;
}

void Tape::backward(Var root) {
  check_valid(root, "backward");
  if (value(root).size() != 1) fail("backward", "root must be scalar");
  grad_slot(root).data[0] = 1.0;
  for (std::int32_t i = root.idx; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad_set && n.back) n.back(*this);
  }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

Tape::Var embedding_lookup(Tape& t, Tape::Var table,
                           const std::vector<std::int32_t>& ids) {
  check_valid(table, "embedding_lookup");
  const NumArray& tab = t.value(table);
  if (tab.ndim() != 2) fail("embedding_lookup", "table must be 2-D");
  const std::size_t V = tab.rows();
  const std::size_t D = tab.cols();
  if (ids.empty()) fail("embedding_lookup", "ids must be non-empty");
  for (std::int32_t id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= V)
      fail("embedding_lookup",
           "id " + std::to_string(id) + " out of range for table with " +
               std::to_string(V) + " rows");
  }
  require_finite(tab, "embedding_lookup table");

  const std::size_t T = ids.size();
  NumArray out = NumArray::zeros({T, D});
  for (std::size_t i = 0; i < T; ++i) {
    const double* src = tab.data.data() + static_cast<std::size_t>(ids[i]) * D;
    double* dst = out.data.data() + i * D;
    for (std::size_t j = 0; j < D; ++j) dst[j] = src[j];
  }

  std::vector<std::int32_t> saved_ids = ids;
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [table, out_v, saved_ids, D](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    NumArray& g_tab = tp.grad_slot(table);
    for (std::size_t i = 0; i < saved_ids.size(); ++i) {
      axpy_n(1.0, g_out.data.data() + i * D,
             g_tab.data.data() + static_cast<std::size_t>(saved_ids[i]) * D, D);
    }
  });
  return out_v;
}

Tape::Var conv1d_valid(Tape& t, Tape::Var input, Tape::Var filters,
                       Tape::Var bias) {
  check_valid(input, "conv1d_valid");
  check_valid(filters, "conv1d_valid");
  check_valid(bias, "conv1d_valid");
  const NumArray& in = t.value(input);
  const NumArray& f = t.value(filters);
  const NumArray& b = t.value(bias);
  if (in.ndim() != 2) fail("conv1d_valid", "input must be 2-D");
  if (f.ndim() != 3) fail("conv1d_valid", "filters must be 3-D [out x w x in]");
  if (b.ndim() != 1) fail("conv1d_valid", "bias must be 1-D");
  const std::size_t T = in.rows();
  const std::size_t Cin = in.cols();
  const std::size_t Cout = f.dim(0);
  const std::size_t w = f.dim(1);
  if (f.dim(2) != Cin)
    fail("conv1d_valid", "filter input width " + std::to_string(f.dim(2)) +
                             " != input channels " + std::to_string(Cin));
  if (b.size() != Cout) fail("conv1d_valid", "bias length != output channels");
  if (T < w)
    fail("conv1d_valid", "input length " + std::to_string(T) +
                             " shorter than filter width " + std::to_string(w));
  require_finite(in, "conv1d_valid input");
  require_finite(f, "conv1d_valid filters");
  require_finite(b, "conv1d_valid bias");

  const std::size_t Tout = T - w + 1;
  const std::size_t K = w * Cin;  // one filter = one contiguous row of K taps
  NumArray out = NumArray::zeros({Tout, Cout});
  // Filter-row-outer order keeps each K-tap row cache-resident across all
  // output positions (the filter matrix dwarfs the input here).
  for (std::size_t o = 0; o < Cout; ++o) {
    const double* frow = f.data.data() + o * K;
    const double bo = b.data[o];
    for (std::size_t p = 0; p < Tout; ++p)
      out.data[p * Cout + o] = bo + dot_n(in.data.data() + p * Cin, frow, K);
  }

  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [input, filters, bias, out_v, Tout, Cout, Cin,
                         K](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    const NumArray& in_v = tp.value(input);
    const NumArray& f_v = tp.value(filters);
    NumArray& g_in = tp.grad_slot(input);
    NumArray& g_f = tp.grad_slot(filters);
    NumArray& g_b = tp.grad_slot(bias);
    for (std::size_t o = 0; o < Cout; ++o) {
      const double* frow = f_v.data.data() + o * K;
      double* gfrow = g_f.data.data() + o * K;
      double gb = 0.0;
      for (std::size_t p = 0; p < Tout; ++p) {
        const double g = g_out.data[p * Cout + o];
        if (g == 0.0) continue;
        axpy_n(g, frow, g_in.data.data() + p * Cin, K);
        axpy_n(g, in_v.data.data() + p * Cin, gfrow, K);
        gb += g;
      }
      g_b.data[o] += gb;
    }
  });
  return out_v;
}

Tape::Var maxpool1d(Tape& t, Tape::Var input) {
  check_valid(input, "maxpool1d");
  const NumArray& in = t.value(input);
  if (in.ndim() != 2) fail("maxpool1d", "input must be 2-D");
  const std::size_t T = in.rows();
  const std::size_t C = in.cols();
  if (T < 2)
    fail("maxpool1d",
         "input length " + std::to_string(T) + " below window size 2");
  require_finite(in, "maxpool1d input");

  const std::size_t P = T / 2;
  NumArray out = NumArray::zeros({P, C});
  std::vector<std::uint32_t> winner(P * C);
  for (std::size_t p = 0; p < P; ++p) {
    const double* a = in.data.data() + (2 * p) * C;
    const double* b = a + C;
    for (std::size_t c = 0; c < C; ++c) {
      // First index wins ties.
      if (a[c] >= b[c]) {
        out.data[p * C + c] = a[c];
        winner[p * C + c] = static_cast<std::uint32_t>(2 * p);
      } else {
        out.data[p * C + c] = b[c];
        winner[p * C + c] = static_cast<std::uint32_t>(2 * p + 1);
      }
    }
  }

  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [input, out_v, winner, P, C](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    NumArray& g_in = tp.grad_slot(input);
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t c = 0; c < C; ++c)
        g_in.data[winner[p * C + c] * C + c] += g_out.data[p * C + c];
  });
  return out_v;
}

Tape::Var global_avg_pool(Tape& t, Tape::Var input) {
  check_valid(input, "global_avg_pool");
  const NumArray& in = t.value(input);
  if (in.ndim() != 2) fail("global_avg_pool", "input must be 2-D");
  const std::size_t T = in.rows();
  const std::size_t C = in.cols();
  if (T < 1) fail("global_avg_pool", "input must have at least one row");
  require_finite(in, "global_avg_pool input");

  NumArray out = NumArray::zeros({C});
  for (std::size_t r = 0; r < T; ++r)
    for (std::size_t c = 0; c < C; ++c) out.data[c] += in.data[r * C + c];
  const double inv = 1.0 / static_cast<double>(T);
  for (std::size_t c = 0; c < C; ++c) out.data[c] *= inv;

  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [input, out_v, T, C, inv](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    NumArray& g_in = tp.grad_slot(input);
    for (std::size_t r = 0; r < T; ++r)
      axpy_n(inv, g_out.data.data(), g_in.data.data() + r * C, C);
  });
  return out_v;
}

Tape::Var dense(Tape& t, Tape::Var input, Tape::Var weight, Tape::Var bias,
                Activation act) {
  check_valid(input, "dense");
  check_valid(weight, "dense");
  check_valid(bias, "dense");
  const NumArray& x = t.value(input);
  const NumArray& W = t.value(weight);
  const NumArray& b = t.value(bias);
  if (x.ndim() != 1) fail("dense", "input must be 1-D");
  if (W.ndim() != 2) fail("dense", "weight must be 2-D");
  if (b.ndim() != 1) fail("dense", "bias must be 1-D");
  const std::size_t m = x.size();
  const std::size_t n = W.rows();
  if (W.cols() != m)
    fail("dense", "weight cols " + std::to_string(W.cols()) +
                      " != input length " + std::to_string(m));
  if (b.size() != n) fail("dense", "bias length != weight rows");
  require_finite(x, "dense input");
  require_finite(W, "dense weight");
  require_finite(b, "dense bias");

  NumArray pre = NumArray::zeros({n});
  for (std::size_t i = 0; i < n; ++i)
    pre.data[i] = b.data[i] + dot_n(W.data.data() + i * m, x.data.data(), m);
  NumArray out = pre;
  if (act == Activation::relu)
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;

  std::vector<double> saved_pre = std::move(pre.data);
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [input, weight, bias, out_v, act, m, n,
                         saved_pre](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    const NumArray& x_v = tp.value(input);
    const NumArray& W_v = tp.value(weight);
    NumArray& g_x = tp.grad_slot(input);
    NumArray& g_W = tp.grad_slot(weight);
    NumArray& g_b = tp.grad_slot(bias);
    for (std::size_t i = 0; i < n; ++i) {
      double g = g_out.data[i];
      if (act == Activation::relu && saved_pre[i] <= 0.0) g = 0.0;
      if (g == 0.0) continue;
      axpy_n(g, W_v.data.data() + i * m, g_x.data.data(), m);
      axpy_n(g, x_v.data.data(), g_W.data.data() + i * m, m);
      g_b.data[i] += g;
    }
  });
  return out_v;
}

Tape::Var dropout(Tape& t, Tape::Var input, double rate, RunMode mode,
                  Rng& rng) {
  check_valid(input, "dropout");
  if (!(rate >= 0.0 && rate < 1.0))
    fail("dropout", "rate must lie in [0,1), got " + std::to_string(rate));
  const NumArray& in = t.value(input);
  require_finite(in, "dropout input");

  if (mode == RunMode::infer) {
    NumArray out = in;
    Tape::Var out_v = t.node(std::move(out));
    t.set_back(out_v, [input, out_v](Tape& tp) {
      const NumArray& g_out = *tp.maybe_grad(out_v);
      NumArray& g_in = tp.grad_slot(input);
      axpy_n(1.0, g_out.data.data(), g_in.data.data(), g_in.size());
    });
    return out_v;
  }

  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    mask[i] = rng.uniform() >= rate ? keep_scale : 0.0;

  NumArray out = in;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask[i];

  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [input, out_v, mask](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    NumArray& g_in = tp.grad_slot(input);
    for (std::size_t i = 0; i < mask.size(); ++i)
      g_in.data[i] += mask[i] * g_out.data[i];
  });
  return out_v;
}

Tape::Var dot(Tape& t, Tape::Var a, Tape::Var b) {
  check_valid(a, "dot");
  check_valid(b, "dot");
  const NumArray& av = t.value(a);
  const NumArray& bv = t.value(b);
  if (av.size() != bv.size())
    fail("dot", "length mismatch: " + std::to_string(av.size()) + " vs " +
                    std::to_string(bv.size()));
  require_finite(av, "dot lhs");
  require_finite(bv, "dot rhs");

  NumArray out = NumArray::scalar(dot_n(av.data.data(), bv.data.data(), av.size()));
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [a, b, out_v](Tape& tp) {
    const double g = tp.maybe_grad(out_v)->data[0];
    const NumArray& av2 = tp.value(a);
    const NumArray& bv2 = tp.value(b);
    axpy_n(g, bv2.data.data(), tp.grad_slot(a).data.data(), av2.size());
    axpy_n(g, av2.data.data(), tp.grad_slot(b).data.data(), bv2.size());
  });
  return out_v;
}

Tape::Var relu(Tape& t, Tape::Var x) {
  check_valid(x, "relu");
  const NumArray& in = t.value(x);
  require_finite(in, "relu input");
  NumArray out = in;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  std::vector<double> pre = in.data;
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [x, out_v, pre](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    NumArray& g_in = tp.grad_slot(x);
    for (std::size_t i = 0; i < pre.size(); ++i)
      if (pre[i] > 0.0) g_in.data[i] += g_out.data[i];
  });
  return out_v;
}

Tape::Var add(Tape& t, Tape::Var a, Tape::Var b) {
  check_valid(a, "add");
  check_valid(b, "add");
  const NumArray& av = t.value(a);
  const NumArray& bv = t.value(b);
  if (!av.same_shape(bv)) fail("add", "shape mismatch");
  NumArray out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [a, b, out_v](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    axpy_n(1.0, g_out.data.data(), tp.grad_slot(a).data.data(), g_out.size());
    axpy_n(1.0, g_out.data.data(), tp.grad_slot(b).data.data(), g_out.size());
  });
  return out_v;
}

Tape::Var scale(Tape& t, Tape::Var x, double c) {
  check_valid(x, "scale");
  if (!std::isfinite(c)) fail("scale", "non-finite scale factor");
  NumArray out = t.value(x);
  for (double& v : out.data) v *= c;
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [x, out_v, c](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    axpy_n(c, g_out.data.data(), tp.grad_slot(x).data.data(), g_out.size());
  });
  return out_v;
}

Tape::Var negate(Tape& t, Tape::Var x) { return scale(t, x, -1.0); }

Tape::Var mean_of(Tape& t, const std::vector<Tape::Var>& vs) {
  if (vs.empty()) fail("mean_of", "empty input list");
  for (const auto& v : vs) check_valid(v, "mean_of");
  const NumArray& first = t.value(vs[0]);
  NumArray out = NumArray::zeros(first.shape);
  for (const auto& v : vs) {
    const NumArray& val = t.value(v);
    if (!val.same_shape(first)) fail("mean_of", "shape mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += val.data[i];
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (double& v : out.data) v *= inv;
  std::vector<Tape::Var> saved = vs;
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [saved, out_v, inv](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    for (const auto& v : saved)
      axpy_n(inv, g_out.data.data(), tp.grad_slot(v).data.data(),
             g_out.size());
  });
  return out_v;
}

Tape::Var sum_scalars(Tape& t, const std::vector<Tape::Var>& vs) {
  if (vs.empty()) fail("sum_scalars", "empty input list");
  double total = 0.0;
  for (const auto& v : vs) {
    check_valid(v, "sum_scalars");
    if (t.value(v).size() != 1) fail("sum_scalars", "inputs must be scalars");
    total += t.value(v).data[0];
  }
  std::vector<Tape::Var> saved = vs;
  Tape::Var out_v = t.node(NumArray::scalar(total));
  t.set_back(out_v, [saved, out_v](Tape& tp) {
    const double g = tp.maybe_grad(out_v)->data[0];
    for (const auto& v : saved) tp.grad_slot(v).data[0] += g;
  });
  return out_v;
}

Tape::Var norm2(Tape& t, Tape::Var x) {
  check_valid(x, "norm2");
  const NumArray& xv = t.value(x);
  require_finite(xv, "norm2 input");
  const double n = std::sqrt(dot_n(xv.data.data(), xv.data.data(), xv.size()));
  Tape::Var out_v = t.node(NumArray::scalar(n));
  t.set_back(out_v, [x, out_v, n](Tape& tp) {
    const double g = tp.maybe_grad(out_v)->data[0];
    const NumArray& xv2 = tp.value(x);
    axpy_n(g / n, xv2.data.data(), tp.grad_slot(x).data.data(), xv2.size());
  });
  return out_v;
}

Tape::Var scale_by_scalar(Tape& t, Tape::Var x, Tape::Var s) {
  check_valid(x, "scale_by_scalar");
  check_valid(s, "scale_by_scalar");
  if (t.value(s).size() != 1) fail("scale_by_scalar", "s must be scalar");
  const double sv = t.value(s).data[0];
  NumArray out = t.value(x);
  for (double& v : out.data) v *= sv;
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [x, s, out_v, sv](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    const NumArray& xv = tp.value(x);
    axpy_n(sv, g_out.data.data(), tp.grad_slot(x).data.data(), g_out.size());
    tp.grad_slot(s).data[0] +=
        dot_n(xv.data.data(), g_out.data.data(), xv.size());
  });
  return out_v;
}

Tape::Var div_scalars(Tape& t, Tape::Var a, Tape::Var b) {
  check_valid(a, "div_scalars");
  check_valid(b, "div_scalars");
  if (t.value(a).size() != 1 || t.value(b).size() != 1)
    fail("div_scalars", "inputs must be scalars");
  const double av = t.value(a).data[0];
  const double bv = t.value(b).data[0];
  if (bv == 0.0) fail("div_scalars", "division by zero");
  Tape::Var out_v = t.node(NumArray::scalar(av / bv));
  t.set_back(out_v, [a, b, out_v, av, bv](Tape& tp) {
    const double g = tp.maybe_grad(out_v)->data[0];
    tp.grad_slot(a).data[0] += g / bv;
    tp.grad_slot(b).data[0] -= g * av / (bv * bv);
  });
  return out_v;
}

double softplus_value(double x) {
  // max(x,0) + log1p(exp(-|x|)) never overflows and keeps full precision.
  return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

Tape::Var softplus(Tape& t, Tape::Var x) {
  check_valid(x, "softplus");
  const NumArray& xv = t.value(x);
  require_finite(xv, "softplus input");
  NumArray out = xv;
  for (double& v : out.data) v = softplus_value(v);
  std::vector<double> pre = xv.data;
  Tape::Var out_v = t.node(std::move(out));
  t.set_back(out_v, [x, out_v, pre](Tape& tp) {
    const NumArray& g_out = *tp.maybe_grad(out_v);
    NumArray& g_in = tp.grad_slot(x);
    for (std::size_t i = 0; i < pre.size(); ++i) {
      const double sig = 1.0 / (1.0 + std::exp(-pre[i]));
      g_in.data[i] += sig * g_out.data[i];
    }
  });
  return out_v;
}

}  // namespace sentdoc
