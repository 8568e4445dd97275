#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sentdoc/checkpoint.hpp"
#include "sentdoc/encoder.hpp"
#include "sentdoc/rng.hpp"

using namespace sentdoc;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint make_checkpoint(std::uint64_t seed, const std::string& opt_kind) {
  Rng rng(seed);
  Checkpoint ck;
  ck.params = init_model(9, rng);
  ck.opt.kind = opt_kind;
  if (opt_kind == "adam") {
    for (NumArray* block : param_blocks(ck.params)) {
      NumArray m(block->shape), v(block->shape);
      for (std::size_t i = 0; i < m.size(); ++i) {
        m.data[i] = rng.uniform(-0.01, 0.01);
        v.data[i] = rng.uniform(0.0, 0.01);
      }
      ck.opt.m.push_back(m);
      ck.opt.v.push_back(v);
    }
  }
  for (std::size_t i = 0; i < ck.rng_state.size(); ++i)
    ck.rng_state[i] = static_cast<std::uint8_t>(rng.uniform_int(256));
  ck.step = 12345;
  return ck;
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("save/load round trip preserves every bit") {
    for (const std::string kind : {"adam", "sgd"}) {
      // Values quantized like training leaves them; the format stores f32.
      Checkpoint ck = make_checkpoint(7, kind);
      for (NumArray* block : param_blocks(ck.params)) block->quantize_f32();
      for (NumArray& m : ck.opt.m) m.quantize_f32();
      for (NumArray& v : ck.opt.v) v.quantize_f32();

      const auto path = scratch("ck_roundtrip_" + kind + ".bin");
      save_checkpoint(ck, path.string());
      const Checkpoint lk = load_checkpoint(path.string());
      CHECK(lk.version == ck.version);
      CHECK(lk.step == ck.step);
      CHECK(lk.rng_state == ck.rng_state);
      CHECK(lk.opt.kind == ck.opt.kind);
      const auto a = named_param_blocks(ck.params);
      auto lk_params = lk.params;
      const auto b = named_param_blocks(lk_params);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].second->shape == b[i].second->shape);
        CHECK(a[i].second->data == b[i].second->data);
      }
      REQUIRE(lk.opt.m.size() == ck.opt.m.size());
      for (std::size_t i = 0; i < ck.opt.m.size(); ++i) {
        CHECK(lk.opt.m[i].data == ck.opt.m[i].data);
        CHECK(lk.opt.v[i].data == ck.opt.v[i].data);
      }

      // Re-saving the loaded state reproduces the file byte for byte.
      const auto path2 = scratch("ck_roundtrip2_" + kind + ".bin");
      save_checkpoint(lk, path2.string());
      CHECK(slurp(path) == slurp(path2));
      std::filesystem::remove(path);
      std::filesystem::remove(path2);
    }
  }

  TEST_CASE("each corruption yields its own error type") {
    const Checkpoint ck = make_checkpoint(8, "adam");
    const auto path = scratch("ck_corrupt.bin");
    save_checkpoint(ck, path.string());
    const std::string good = slurp(path);

    SUBCASE("wrong magic") {
      std::string bad = good;
      bad[0] = 'X';
      spit(path, bad);
      CHECK_THROWS_AS((void)load_checkpoint(path.string()), BadMagicError);
    }
    SUBCASE("unsupported version") {
      std::string bad = good;
      bad[4] = 0x7f;
      spit(path, bad);
      CHECK_THROWS_AS((void)load_checkpoint(path.string()),
                      UnsupportedVersionError);
    }
    SUBCASE("truncated payload") {
      spit(path, good.substr(0, good.size() / 2));
      CHECK_THROWS_AS((void)load_checkpoint(path.string()),
                      TruncatedFileError);
    }
    SUBCASE("truncated header") {
      spit(path, good.substr(0, 7));
      CHECK_THROWS_AS((void)load_checkpoint(path.string()),
                      TruncatedFileError);
    }
    SUBCASE("wrong section name") {
      // The first section name, "embedding", starts right after the
      // 17-byte header plus the 2-byte name length.
      std::string bad = good;
      bad[19] = 'q';
      spit(path, bad);
      CHECK_THROWS_AS((void)load_checkpoint(path.string()),
                      MalformedCheckpointError);
    }
    SUBCASE("trailing garbage") {
      spit(path, good + "extra");
      CHECK_THROWS_AS((void)load_checkpoint(path.string()),
                      MalformedCheckpointError);
    }
    SUBCASE("every corruption is also a CheckpointError") {
      std::string bad = good;
      bad[0] = 'X';
      spit(path, bad);
      CHECK_THROWS_AS((void)load_checkpoint(path.string()), CheckpointError);
    }
    std::filesystem::remove(path);
  }

  TEST_CASE("missing file reports a checkpoint error") {
    CHECK_THROWS_AS((void)load_checkpoint("/nonexistent/never.bin"),
                    CheckpointError);
  }

  TEST_CASE("adam state must match the block count") {
    Checkpoint ck = make_checkpoint(9, "adam");
    ck.opt.m.pop_back();
    const auto path = scratch("ck_badopt.bin");
    CHECK_THROWS_AS(save_checkpoint(ck, path.string()), std::exception);
  }
}
