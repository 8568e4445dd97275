#include "sentdoc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sentdoc {

namespace {

double run_forward(const GradCheckBuilder& build,
                   const std::vector<NumArray*>& params) {
  Tape tape;
  std::vector<Tape::Var> vars;
  vars.reserve(params.size());
  for (const NumArray* p : params) vars.push_back(tape.leaf(*p));
  Tape::Var root = build(tape, vars);
  if (tape.value(root).size() != 1)
    throw std::invalid_argument("grad_check: computation must be scalar");
  return tape.value(root).data[0];
}

std::vector<std::size_t> pick_coords(std::size_t size, std::size_t want,
                                     Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (size <= want) return idx;
  for (std::size_t i = 0; i < want; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_int(size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(want);
  return idx;
}

/// Two-regime error metric scale: coordinates whose gradients are smaller
/// than this are held to an absolute bound (tolerance * floor) instead of a
/// relative one, since a central difference at finite eps cannot resolve a
/// relative error on a vanishing gradient (truncation is O(eps^2) absolute).
constexpr double kGradScaleFloor = 1e-3;

/// A central difference only estimates a derivative where the function is
/// smooth across the probe interval [-eps, +eps]. The slopes over the two
/// outer half-intervals [eps/2, eps] and [-eps, -eps/2] agree to O(eps) on
/// smooth stretches, but a ReLU kink or max-pool argmax switch anywhere in
/// the interval leaves its slope jump in exactly one of them (or, for a
/// kink inside (-eps/2, eps/2), splits the two cleanly on either side of
/// it), so they disagree by the size of the jump.
bool straddles_kink(double slope_right, double slope_left) {
  return std::fabs(slope_right - slope_left) >
         1e-4 * std::max(std::fabs(slope_right), std::fabs(slope_left)) +
             1e-9;
}

}  // namespace

GradCheckReport grad_check(const GradCheckBuilder& build,
                           const std::vector<NumArray*>& params, double eps,
                           std::size_t coords_per_block, Rng rng) {
  if (params.empty())
    throw std::invalid_argument("grad_check: no parameter blocks");
  if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be > 0");

  const double f0 = run_forward(build, params);
  const double f1 = run_forward(build, params);
  if (f0 != f1)
    throw std::runtime_error(
        "grad_check: computation is non-deterministic (two forward passes "
        "disagree)");

  // One analytic pass: record, backprop, keep the per-block gradients.
  Tape tape;
  std::vector<Tape::Var> vars;
  vars.reserve(params.size());
  for (const NumArray* p : params) vars.push_back(tape.leaf(*p));
  Tape::Var root = build(tape, vars);
  tape.backward(root);

  GradCheckReport report;
  report.per_block_checked.assign(params.size(), 0);
  for (std::size_t b = 0; b < params.size(); ++b) {
    NumArray& block = *params[b];
    const NumArray* analytic = tape.maybe_grad(vars[b]);
    // Draw spare coordinates so kink-straddling probes can be replaced and
    // the block still gets its full quota when possible.
    const std::vector<std::size_t> coords = pick_coords(
        block.size(), 2 * coords_per_block + 16, rng);
    std::size_t scored = 0;
    for (std::size_t c : coords) {
      if (scored >= coords_per_block) break;
      const double saved = block.data[c];
      block.data[c] = saved + eps;
      const double f_plus = run_forward(build, params);
      block.data[c] = saved - eps;
      const double f_minus = run_forward(build, params);
      block.data[c] = saved + 0.5 * eps;
      const double f_plus_half = run_forward(build, params);
      block.data[c] = saved - 0.5 * eps;
      const double f_minus_half = run_forward(build, params);
      block.data[c] = saved;

      const double slope_right = (f_plus - f_plus_half) / (0.5 * eps);
      const double slope_left = (f_minus_half - f_minus) / (0.5 * eps);
      if (straddles_kink(slope_right, slope_left)) {
        ++report.coords_skipped_nonsmooth;
        continue;
      }

      const double g_n = (f_plus - f_minus) / (2.0 * eps);

      const double g_a = analytic ? analytic->data[c] : 0.0;
      const double rel = std::fabs(g_a - g_n) /
                         std::max(kGradScaleFloor,
                                  std::fabs(g_a) + std::fabs(g_n));
      ++scored;
      ++report.coords_checked;
      ++report.per_block_checked[b];
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_block = b;
        report.worst_coord = c;
      }
    }
  }
  return report;
}

}  // namespace sentdoc
