#ifndef SENTDOC_GRADCHECK_SUITE_HPP
#define SENTDOC_GRADCHECK_SUITE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sentdoc/gradcheck.hpp"

namespace sentdoc {

/// One named case of the gradient verification suite.
struct GradSuiteCase {
  std::string name;
  GradCheckReport report;
  /// Sum over blocks of min(coords_per_block, block size): the coordinate
  /// count the case is expected to score, before unavoidable kink skips.
  std::size_t coords_required = 0;
  bool pass = false;
};

struct GradSuiteResult {
  std::vector<GradSuiteCase> cases;
  bool pass = false;
};

/// Finite-difference verification of every differentiable tape operation —
/// in isolation, in small compositions (conv stacks, shared-parameter
/// branches), and over the full two-encoder scoring pipeline: context
/// sentences encoded and averaged, the mean length-adjusted, candidate
/// encodings dotted against it, and the logits fed to the negative-sampling
/// loss, differentiated with respect to every parameter block including the
/// shared embedding table.
///
/// All arithmetic is 64-bit; gradients are scored against central
/// differences at `eps` on up to `coords_per_block` sampled coordinates per
/// parameter block. A case passes when its worst error metric stays below
/// `tolerance` and every block scored at least
/// min(coords_per_block, block size) - max_shortfall coordinates
/// (the shortfall allows for coordinates whose probe interval straddles a
/// ReLU kink or pooling argmax switch; those are skipped, never scored).
GradSuiteResult run_gradient_suite(std::uint64_t seed,
                                   std::size_t coords_per_block = 200,
                                   double eps = 1e-5, double tolerance = 1e-4,
                                   std::size_t max_shortfall = 8);

}  // namespace sentdoc

#endif  // SENTDOC_GRADCHECK_SUITE_HPP
