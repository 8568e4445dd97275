#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sentdoc/numarray.hpp"
#include "sentdoc/rng.hpp"
#include "sentdoc/tape.hpp"

using namespace sentdoc;

TEST_SUITE("numarray") {
  TEST_CASE("construction and indexing") {
    NumArray a({2, 3}, 0.5);
    CHECK(a.size() == 6);
    CHECK(a.rows() == 2);
    CHECK(a.cols() == 3);
    a.at(1, 2) = 7.0;
    CHECK(a.data[5] == 7.0);
    CHECK(NumArray::scalar(3.0).size() == 1);
    const NumArray v = NumArray::vector_of({1.0, 2.0, 3.0});
    CHECK(v.ndim() == 1);
    CHECK(v.at(2) == 3.0);
    const NumArray m = NumArray::matrix_of(2, 2, {1, 2, 3, 4});
    CHECK(m.at(1, 0) == 3.0);
  }

  TEST_CASE("dot_n matches naive sum") {
    Rng rng(2);
    for (std::size_t n : {1u, 3u, 15u, 16u, 17u, 64u, 100u, 257u}) {
      std::vector<double> a(n), b(n);
      for (double& x : a) x = rng.uniform(-1, 1);
      for (double& x : b) x = rng.uniform(-1, 1);
      double naive = 0.0;
      for (std::size_t i = 0; i < n; ++i) naive += a[i] * b[i];
      CHECK(dot_n(a.data(), b.data(), n) ==
            doctest::Approx(naive).epsilon(1e-13));
    }
  }

  TEST_CASE("dot_n reduction order is deterministic") {
    Rng rng(3);
    std::vector<double> a(1000), b(1000);
    for (double& x : a) x = rng.uniform(-1, 1);
    for (double& x : b) x = rng.uniform(-1, 1);
    const double first = dot_n(a.data(), b.data(), a.size());
    for (int i = 0; i < 5; ++i)
      CHECK(dot_n(a.data(), b.data(), a.size()) == first);
  }

  TEST_CASE("axpy_n") {
    std::vector<double> x = {1, 2, 3}, y = {10, 20, 30};
    axpy_n(2.0, x.data(), y.data(), 3);
    CHECK(y == std::vector<double>{12, 24, 36});
  }

  TEST_CASE("quantize_f32 rounds through float") {
    NumArray a({3});
    a.data = {0.1, 1.0, 1e-300};
    a.quantize_f32();
    CHECK(a.data[0] == static_cast<double>(0.1f));
    CHECK(a.data[1] == 1.0);
    CHECK(a.data[2] == 0.0);  // below float denormal range
  }

  TEST_CASE("checked mode rejects non-finite op inputs") {
    set_checked_mode(true);
    Tape t;
    NumArray bad = NumArray::vector_of({1.0, std::nan("")});
    Tape::Var v = t.node(std::move(bad));
    CHECK_THROWS_AS((void)relu(t, v), std::runtime_error);
    set_checked_mode(false);
    Tape t2;
    NumArray bad2 = NumArray::vector_of({1.0, std::nan("")});
    Tape::Var v2 = t2.node(std::move(bad2));
    CHECK_NOTHROW((void)relu(t2, v2));
  }
}

TEST_SUITE("tape") {
  TEST_CASE("softplus forward values are exact") {
    // softplus(x) = max(x,0) + log1p(exp(-|x|)), evaluated identically here.
    Tape t;
    const NumArray x = NumArray::vector_of({-2.0, 0.0, 1.0, 3.0, 40.0});
    Tape::Var v = t.node(x);
    const NumArray& out = t.value(softplus(t, v));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x.data[i];
      const double want =
          (xi > 0.0 ? xi : 0.0) + std::log1p(std::exp(-std::fabs(xi)));
      CHECK(out.data[i] == want);
    }
    CHECK(softplus_value(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(softplus_value(-2.0) ==
          doctest::Approx(0.12692801104297250).epsilon(1e-14));
    CHECK(softplus_value(3.0) ==
          doctest::Approx(3.0485873515737421).epsilon(1e-14));
  }

  TEST_CASE("backward accumulates over reuse") {
    // d/dx sum(x + x) = 2 per element.
    Tape t;
    NumArray x = NumArray::vector_of({1.0, -2.0, 3.0});
    Tape::Var vx = t.leaf(x);
    Tape::Var s = add(t, vx, vx);
    NumArray ones({3}, 1.0);
    Tape::Var total = dot(t, s, t.node(std::move(ones)));
    t.backward(total);
    const NumArray* g = t.maybe_grad(vx);
    REQUIRE(g != nullptr);
    for (double v : g->data) CHECK(v == 2.0);
  }

  TEST_CASE("dot backward") {
    Tape t;
    NumArray a = NumArray::vector_of({1.0, 2.0});
    NumArray b = NumArray::vector_of({-3.0, 5.0});
    Tape::Var va = t.leaf(a), vb = t.leaf(b);
    t.backward(dot(t, va, vb));
    CHECK(t.maybe_grad(va)->data == b.data);
    CHECK(t.maybe_grad(vb)->data == a.data);
  }

  TEST_CASE("relu zeroes gradients of inactive elements") {
    Tape t;
    NumArray x = NumArray::vector_of({-1.0, 2.0});
    Tape::Var vx = t.leaf(x);
    Tape::Var r = relu(t, vx);
    NumArray ones({2}, 1.0);
    t.backward(dot(t, r, t.node(std::move(ones))));
    CHECK(t.maybe_grad(vx)->data == std::vector<double>{0.0, 1.0});
  }

  TEST_CASE("maxpool forwards the window max, first index winning ties") {
    Tape t;
    NumArray in = NumArray::matrix_of(5, 1, {1, 4, 4, 4, 9});
    Tape::Var v = t.node(in);
    Tape::Var p = maxpool1d(t, v);
    const NumArray& out = t.value(p);
    REQUIRE(out.rows() == 2);  // trailing odd row dropped
    CHECK(out.data[0] == 4.0);
    CHECK(out.data[1] == 4.0);
  }

  TEST_CASE("maxpool routes gradient only to the winner") {
    Tape t;
    NumArray in = NumArray::matrix_of(4, 1, {1, 4, 7, 7});
    Tape::Var v = t.leaf(in);
    Tape::Var p = maxpool1d(t, v);
    NumArray ones({2, 1}, 1.0);
    t.backward(dot(t, p, t.node(std::move(ones))));
    // Second window ties; the earlier row must win.
    CHECK(t.maybe_grad(v)->data == std::vector<double>{0, 1, 1, 0});
  }

  TEST_CASE("embedding lookup gathers rows and scatters gradients") {
    Tape t;
    NumArray table = NumArray::matrix_of(3, 2, {0, 1, 10, 11, 20, 21});
    Tape::Var vt = t.leaf(table);
    Tape::Var e = embedding_lookup(t, vt, {2, 0, 2});
    const NumArray& out = t.value(e);
    CHECK(out.at(0, 0) == 20.0);
    CHECK(out.at(1, 1) == 1.0);
    NumArray ones({3, 2}, 1.0);
    t.backward(dot(t, e, t.node(std::move(ones))));
    // Row 2 used twice, row 0 once, row 1 never.
    CHECK(t.maybe_grad(vt)->data ==
          std::vector<double>{1, 1, 0, 0, 2, 2});
  }

  TEST_CASE("dropout is inert in infer mode and unbiased in train mode") {
    Rng rng(5);
    NumArray x({64}, 1.0);
    {
      Tape t;
      Tape::Var v = t.node(x);
      Tape::Var d = dropout(t, v, 0.5, RunMode::infer, rng);
      CHECK(t.value(d).data == x.data);
    }
    // Monte-Carlo: inverted scaling keeps the expectation at the input.
    double sum = 0.0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) {
      Tape t;
      Tape::Var v = t.node(x);
      Tape::Var d = dropout(t, v, 0.5, RunMode::train, rng);
      for (double o : t.value(d).data) sum += o;
    }
    const double mean = sum / (trials * 64.0);
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("conv1d is linear in its input when biases are zero") {
    Rng rng(8);
    NumArray in({6, 3}), f({4, 2, 3}), b({4}, 0.0);
    for (double& v : in.data) v = rng.uniform(-1, 1);
    for (double& v : f.data) v = rng.uniform(-1, 1);
    NumArray in2 = in;
    for (double& v : in2.data) v *= -2.5;
    Tape t;
    const NumArray& y1 =
        t.value(conv1d_valid(t, t.node(in), t.node(f), t.node(b)));
    const NumArray& y2 =
        t.value(conv1d_valid(t, t.node(in2), t.node(f), t.node(b)));
    for (std::size_t i = 0; i < y1.size(); ++i)
      CHECK(y2.data[i] == doctest::Approx(-2.5 * y1.data[i]).epsilon(1e-12));
  }

  TEST_CASE("shape misuse throws") {
    Tape t;
    Tape::Var a = t.node(NumArray::vector_of({1, 2, 3}));
    Tape::Var b = t.node(NumArray::vector_of({1, 2}));
    CHECK_THROWS_AS((void)add(t, a, b), std::invalid_argument);
    CHECK_THROWS_AS((void)dot(t, a, b), std::invalid_argument);
    Tape::Var m = t.node(NumArray({3, 2}, 1.0));
    CHECK_THROWS_AS((void)dense(t, a, m, b, Activation::none),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)embedding_lookup(t, m, {5}), std::invalid_argument);
  }
}
