#ifndef SENTDOC_CHECKPOINT_HPP
#define SENTDOC_CHECKPOINT_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentdoc/encoder.hpp"

namespace sentdoc {

// Distinct load failures, as the format contract promises.
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadMagicError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct UnsupportedVersionError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct TruncatedFileError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct MalformedCheckpointError : CheckpointError {
  using CheckpointError::CheckpointError;
};

/// Adam first/second moment arrays, one per parameter block in block order.
/// Empty for plain SGD.
struct OptimizerState {
  std::string kind = "adam";  // "adam" or "sgd"
  std::vector<NumArray> m;
  std::vector<NumArray> v;
};

/// Everything needed to resume or reuse a training run.
///
/// On-disk layout: magic "SDOC", version byte 0x01, little-endian u32
/// vocab size, u32 d_w=100, u32 d=100, then named sections, each
/// u16 name length + UTF-8 name + u64 element count + that many raw
/// little-endian 32-bit floats. Section order is fixed: embedding,
/// cntx.conv1.w ... cntx.fc2.b, cdd.conv1.w ... cdd.fc2.b, then (adam only)
/// opt.adam.m.<block> and opt.adam.v.<block> in the same block order, then
/// "rng" (4 elements carrying the 16 generator state bytes) and "step"
/// (2 elements carrying the u64 step counter).
struct Checkpoint {
  std::uint8_t version = 1;
  ModelParams params;
  OptimizerState opt;
  std::array<std::uint8_t, 16> rng_state{};
  std::uint64_t step = 0;

  std::size_t vocab_size() const { return params.embedding.rows(); }
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace sentdoc

#endif  // SENTDOC_CHECKPOINT_HPP
