#include <doctest.h>

#include <cmath>
#include <vector>

#include "sentdoc/encoder.hpp"
#include "sentdoc/rng.hpp"

using namespace sentdoc;

namespace {

NumArray enc(const ModelParams& m, Which w, const Sentence& s) {
  Rng rng(0);
  return encode(m, w, s, RunMode::infer, rng);
}

double linf(const NumArray& a, const NumArray& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace

TEST_SUITE("encoder") {
  TEST_CASE("output is a 100-dimensional vector for any input length") {
    Rng rng(1);
    const ModelParams model = init_model(12, rng);
    for (std::size_t len : {1u, 2u, 9u, 10u, 11u, 40u}) {
      Sentence s;
      for (std::size_t i = 0; i < len; ++i)
        s.push_back(static_cast<std::int32_t>(2 + i % 10));
      const NumArray out = enc(model, Which::cntx, s);
      CHECK(out.ndim() == 1);
      CHECK(out.size() == 100);
      CHECK(out.all_finite());
    }
  }

  TEST_CASE("short sentences behave exactly like explicitly padded ones") {
    Rng rng(2);
    const ModelParams model = init_model(12, rng);
    const Sentence short_s = {4, 5, 6};
    Sentence padded = short_s;
    while (padded.size() < 10) padded.push_back(kPadId);
    const NumArray a = enc(model, Which::cntx, short_s);
    const NumArray b = enc(model, Which::cntx, padded);
    CHECK(a.data == b.data);
  }

  TEST_CASE("the two encoders share only the embedding table") {
    Rng rng(3);
    ModelParams model = init_model(12, rng);
    const Sentence s = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    const NumArray before_cntx = enc(model, Which::cntx, s);
    const NumArray before_cdd = enc(model, Which::cdd, s);
    // Context and candidate paths see the same tokens differently.
    CHECK(linf(before_cntx, before_cdd) > 1e-6);
    // Perturbing a candidate-side filter leaves the context encoding alone.
    model.cdd.conv1_w.data[0] += 0.25;
    CHECK(enc(model, Which::cntx, s).data == before_cntx.data);
    CHECK(linf(enc(model, Which::cdd, s), before_cdd) > 0.0);
    // Perturbing the embedding moves both.
    model.embedding.at(3, 0) += 0.5;
    CHECK(linf(enc(model, Which::cntx, s), before_cntx) > 0.0);
  }

  TEST_CASE("infer mode is bitwise deterministic") {
    Rng rng(4);
    const ModelParams model = init_model(12, rng);
    const Sentence s = {2, 3, 4, 2, 3, 4, 2, 3, 4, 2, 3};
    const NumArray a = enc(model, Which::cntx, s);
    const NumArray b = enc(model, Which::cntx, s);
    CHECK(a.data == b.data);
  }

  TEST_CASE("identical seeds rebuild identical models") {
    Rng r1(9), r2(9);
    ModelParams a = init_model(20, r1);
    ModelParams b = init_model(20, r2);
    const auto blocks_a = param_blocks(a);
    const auto blocks_b = param_blocks(b);
    REQUIRE(blocks_a.size() == 25);
    for (std::size_t i = 0; i < blocks_a.size(); ++i)
      CHECK(blocks_a[i]->data == blocks_b[i]->data);
  }

  TEST_CASE("block order is embedding, then context, then candidate") {
    Rng rng(5);
    ModelParams model = init_model(8, rng);
    const auto named = named_param_blocks(model);
    REQUIRE(named.size() == 25);
    CHECK(named[0].first == "embedding");
    CHECK(named[1].first == "cntx.conv1.w");
    CHECK(named[12].first == "cntx.fc2.b");
    CHECK(named[13].first == "cdd.conv1.w");
    CHECK(named[24].first == "cdd.fc2.b");
    CHECK(named[0].second->rows() == 8);
    CHECK(named[0].second->cols() == 100);
    CHECK(named[1].second->shape == std::vector<std::size_t>{128, 2, 100});
    CHECK(named[12].second->size() == 100);
  }

  TEST_CASE("word order changes the encoding") {
    int sensitive = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const ModelParams model = init_model(12, rng);
      const Sentence s = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
      Sentence rev(s.rbegin(), s.rend());
      if (linf(enc(model, Which::cntx, s),
               enc(model, Which::cntx, rev)) > 1e-9)
        ++sensitive;
    }
    CHECK(sensitive == 20);
  }

  TEST_CASE("dropout only acts in train mode") {
    Rng rng(6);
    const ModelParams model = init_model(12, rng);
    const Sentence s = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    EncoderOptions opts;
    opts.dropout_rate = 0.5;
    Rng drop1(10), drop2(11);
    const NumArray a = encode(model, Which::cntx, s, RunMode::train, drop1, opts);
    const NumArray b = encode(model, Which::cntx, s, RunMode::train, drop2, opts);
    CHECK(linf(a, b) > 0.0);
    Rng drop3(12);
    const NumArray c = encode(model, Which::cntx, s, RunMode::infer, drop3, opts);
    const NumArray d = enc(model, Which::cntx, s);
    CHECK(c.data == d.data);
    int zeros = 0;
    for (double v : a.data) zeros += v == 0.0;
    CHECK(zeros > 20);  // rate 0.5 over 100 outputs
  }
}
