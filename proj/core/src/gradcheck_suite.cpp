#include "sentdoc/gradcheck_suite.hpp"

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <utility>

#include "sentdoc/encoder.hpp"
#include "sentdoc/objective.hpp"
#include "sentdoc/rng.hpp"
#include "sentdoc/tape.hpp"

namespace sentdoc {

namespace {

NumArray rnd(std::initializer_list<std::size_t> shape, Rng& rng) {
  NumArray a(shape);
  for (double& v : a.data) v = rng.uniform(-1.0, 1.0);
  return a;
}

// Reduces any array to a scalar with unit weights so every element's
// gradient participates.
Tape::Var sum_all(Tape& t, Tape::Var x) {
  NumArray ones(t.value(x).shape, 1.0);
  Tape::Var o = t.node(std::move(ones));
  return dot(t, x, o);
}

struct SuiteRunner {
  std::size_t coords_per_block;
  double eps;
  double tolerance;
  std::size_t max_shortfall;
  Rng coord_base;
  GradSuiteResult result;
  std::size_t case_index = 0;

  void run(const std::string& name, const GradCheckBuilder& build,
           const std::vector<NumArray*>& params) {
    GradSuiteCase c;
    c.name = name;
    c.report = grad_check(build, params, eps, coords_per_block,
                          coord_base.stream({case_index++}));
    for (const NumArray* p : params)
      c.coords_required += std::min(coords_per_block, p->size());
    bool quota_ok = true;
    for (std::size_t b = 0; b < params.size(); ++b) {
      const std::size_t want = std::min(coords_per_block, params[b]->size());
      const std::size_t got = c.report.per_block_checked[b];
      if (got + max_shortfall < want) quota_ok = false;
    }
    c.pass = c.report.max_rel_error < tolerance && quota_ok;
    result.pass = result.pass && c.pass;
    result.cases.push_back(std::move(c));
  }
};

}  // namespace

GradSuiteResult run_gradient_suite(std::uint64_t seed,
                                   std::size_t coords_per_block, double eps,
                                   double tolerance,
                                   std::size_t max_shortfall) {
  Rng master(seed);
  Rng fix = master.stream({label_hash("gradcheck-fixtures")});
  SuiteRunner s{coords_per_block, eps, tolerance, max_shortfall,
                master.stream({label_hash("gradcheck-coords")}),
                GradSuiteResult{},
                0};
  s.result.pass = true;

  // --- isolated operations -------------------------------------------------
  {
    static NumArray table;
    table = rnd({6, 5}, fix);
    std::vector<std::int32_t> ids = {0, 3, 3, 5, 1};
    s.run("embedding_lookup",
          [ids](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, embedding_lookup(t, v[0], ids));
          },
          {&table});
  }
  {
    static NumArray in, f, b;
    in = rnd({7, 4}, fix);
    f = rnd({3, 2, 4}, fix);
    b = rnd({3}, fix);
    s.run("conv1d_valid",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, conv1d_valid(t, v[0], v[1], v[2]));
          },
          {&in, &f, &b});
  }
  {
    static NumArray in;
    in = rnd({6, 3}, fix);
    s.run("maxpool1d",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, maxpool1d(t, v[0]));
          },
          {&in});
  }
  {
    static NumArray in;
    in = rnd({5, 3}, fix);
    s.run("global_avg_pool",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, global_avg_pool(t, v[0]));
          },
          {&in});
  }
  {
    static NumArray x, w, b;
    x = rnd({6}, fix);
    w = rnd({4, 6}, fix);
    b = rnd({4}, fix);
    s.run("dense_linear",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, dense(t, v[0], v[1], v[2], Activation::none));
          },
          {&x, &w, &b});
    s.run("dense_relu",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, dense(t, v[0], v[1], v[2], Activation::relu));
          },
          {&x, &w, &b});
  }
  {
    static NumArray x;
    x = rnd({8}, fix);
    s.run("relu",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, relu(t, v[0]));
          },
          {&x});
    s.run("softplus",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, softplus(t, v[0]));
          },
          {&x});
    s.run("negate",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, negate(t, v[0]));
          },
          {&x});
    s.run("scale",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, scale(t, v[0], -2.5));
          },
          {&x});
    s.run("norm2",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return norm2(t, v[0]);
          },
          {&x});
  }
  {
    static NumArray a, b;
    a = rnd({5}, fix);
    b = rnd({5}, fix);
    s.run("add",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, add(t, v[0], v[1]));
          },
          {&a, &b});
    s.run("dot",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return dot(t, v[0], v[1]);
          },
          {&a, &b});
    s.run("add_self",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, add(t, v[0], v[0]));
          },
          {&a});
    s.run("dot_self",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return dot(t, v[0], v[0]);
          },
          {&a});
  }
  {
    static NumArray a, b, c;
    a = rnd({4}, fix);
    b = rnd({4}, fix);
    c = rnd({4}, fix);
    s.run("mean_of",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, mean_of(t, {v[0], v[1], v[2]}));
          },
          {&a, &b, &c});
    s.run("mean_of_repeated",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, mean_of(t, {v[0], v[1], v[0]}));
          },
          {&a, &b});
  }
  {
    static NumArray a, sc, q;
    a = rnd({4}, fix);
    sc = NumArray::scalar(1.7);
    q = NumArray::scalar(-0.6);
    s.run("scale_by_scalar",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return sum_all(t, scale_by_scalar(t, v[0], v[1]));
          },
          {&a, &sc});
    s.run("div_scalars",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            return div_scalars(t, v[0], v[1]);
          },
          {&sc, &q});
    s.run("sum_scalars",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            Tape::Var n1 = norm2(t, v[0]);
            Tape::Var n2 = norm2(t, v[0]);
            return sum_scalars(t, {n1, n2});
          },
          {&a});
  }

  // --- compositions ---------------------------------------------------------
  {
    static NumArray in, f1, b1, f2, b2;
    in = rnd({9, 3}, fix);
    f1 = rnd({4, 2, 3}, fix);
    b1 = rnd({4}, fix);
    f2 = rnd({5, 2, 4}, fix);
    b2 = rnd({5}, fix);
    s.run("conv_relu_conv",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            Tape::Var c1 = conv1d_valid(t, v[0], v[1], v[2]);
            Tape::Var r = relu(t, c1);
            Tape::Var c2 = conv1d_valid(t, r, v[3], v[4]);
            return sum_all(t, c2);
          },
          {&in, &f1, &b1, &f2, &b2});
    s.run("conv_pool_conv",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            Tape::Var c1 = conv1d_valid(t, v[0], v[1], v[2]);
            Tape::Var p = maxpool1d(t, c1);
            Tape::Var c2 = conv1d_valid(t, p, v[3], v[4]);
            return sum_all(t, c2);
          },
          {&in, &f1, &b1, &f2, &b2});
  }
  {
    static NumArray in1, in2, f1, b1;
    in1 = rnd({6, 3}, fix);
    in2 = rnd({6, 3}, fix);
    f1 = rnd({4, 2, 3}, fix);
    b1 = rnd({4}, fix);
    s.run("shared_filter_dot",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            Tape::Var a =
                global_avg_pool(t, conv1d_valid(t, v[0], v[2], v[3]));
            Tape::Var b =
                global_avg_pool(t, conv1d_valid(t, v[1], v[2], v[3]));
            return dot(t, a, b);
          },
          {&in1, &in2, &f1, &b1});
  }

  // --- full scoring pipeline -------------------------------------------------
  {
    static ModelParams model;
    Rng init = master.stream({label_hash("gradcheck-model")});
    model = init_model(8, init);
    // Probe at a generic point: freshly initialized biases are zero and the
    // padding embedding row is zero, which parks many ReLU pre-activations
    // exactly on the kink, where no finite-difference derivative exists.
    // Training immediately moves off that measure-zero point; so does this.
    Rng jitter = master.stream({label_hash("gradcheck-jitter")});
    for (NumArray* block : param_blocks(model))
      for (double& x : block->data) x += jitter.uniform(-0.05, 0.05);
    // Two context sentences, one target, two negatives; mixed lengths so
    // the minimum-length padding path is exercised.
    static const Sentence c1 = {1, 2, 3, 4, 5, 6, 7, 2, 3, 4};
    static const Sentence c2 = {3, 1, 4, 1, 5, 2};
    static const Sentence tgt = {2, 7, 1, 6, 2, 4, 3, 5};
    static const Sentence n1 = {5, 5, 6, 1, 2};
    static const Sentence n2 = {7, 3, 2, 6, 1, 4, 7, 1, 3, 2, 5, 4};
    s.run("scoring_pipeline",
          [](Tape& t, const std::vector<Tape::Var>& v) {
            ModelLeaves l = model_leaves_from(v);
            Rng rng(1);
            Tape::Var e1 =
                encode_on_tape(t, l, Which::cntx, c1, RunMode::infer, rng);
            Tape::Var e2 =
                encode_on_tape(t, l, Which::cntx, c2, RunMode::infer, rng);
            Tape::Var ctx =
                length_adjust_on_tape(t, mean_of(t, {e1, e2}), {e1, e2});
            Tape::Var et =
                encode_on_tape(t, l, Which::cdd, tgt, RunMode::infer, rng);
            Tape::Var v1 =
                encode_on_tape(t, l, Which::cdd, n1, RunMode::infer, rng);
            Tape::Var v2 =
                encode_on_tape(t, l, Which::cdd, n2, RunMode::infer, rng);
            Tape::Var lt = dot(t, ctx, et);
            std::vector<Tape::Var> lns = {dot(t, ctx, v1), dot(t, ctx, v2)};
            return neg_sampling_loss_on_tape(t, lt, lns, LossForm::standard);
          },
          param_blocks(model));
  }

  return s.result;
}

}  // namespace sentdoc
