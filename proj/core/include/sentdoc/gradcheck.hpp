#ifndef SENTDOC_GRADCHECK_HPP
#define SENTDOC_GRADCHECK_HPP

#include <functional>
#include <string>
#include <vector>

#include "sentdoc/numarray.hpp"
#include "sentdoc/rng.hpp"
#include "sentdoc/tape.hpp"

namespace sentdoc {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
  /// Probes where the slopes over [eps/2, eps] and [-eps, -eps/2]
  /// disagreed: the probe interval contains a ReLU kink or max-pool argmax
  /// switch, where a central difference is not a derivative estimate. Such
  /// coordinates are replaced by fresh ones, never scored. (A wrong
  /// analytic gradient cannot hide here: the skip test uses only the
  /// numeric side, and smooth coordinates of the same block still catch
  /// it.)
  std::size_t coords_skipped_nonsmooth = 0;
  // Block index and flat coordinate where the worst error occurred.
  std::size_t worst_block = 0;
  std::size_t worst_coord = 0;
  /// Scored coordinates per parameter block, parallel to `params`.
  std::vector<std::size_t> per_block_checked;
};

/// Compares tape gradients against central finite differences.
///
/// `build` records the scalar computation on a fresh tape. The checker
/// registers one leaf per `params` block (in order) and hands the leaf
/// handles to `build`; the builder must read the differentiated arrays only
/// through those handles. It is re-run for every probe, so it must be
/// deterministic (run any dropout in infer mode or re-seed internally). Two
/// baseline forward passes are compared first and a disagreement raises
/// std::runtime_error.
///
/// Per block, up to `coords_per_block` distinct coordinates are probed
/// (all of them when the block is smaller); rng picks the sample. The
/// error metric is |g_a - g_n| / max(1e-3, |g_a| + |g_n|): relative for
/// gradients above the 1e-3 scale floor, absolute (scaled by the floor)
/// below it, since a finite-difference estimate carries O(eps^2) absolute
/// truncation error that would read as order-one relative error on a
/// vanishing gradient.
using GradCheckBuilder =
    std::function<Tape::Var(Tape&, const std::vector<Tape::Var>&)>;

GradCheckReport grad_check(const GradCheckBuilder& build,
                           const std::vector<NumArray*>& params,
                           double eps = 1e-5,
                           std::size_t coords_per_block = 200,
                           Rng rng = Rng(0));

}  // namespace sentdoc

#endif  // SENTDOC_GRADCHECK_HPP
