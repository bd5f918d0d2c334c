#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tagraid/rng.hpp"
#include "tagraid/struct_attack.hpp"
#include "tagraid/template_attack.hpp"

namespace tagraid::testing {

// Exhaustive best single flip for a target: the candidate with the largest
// attacker loss, ties to the smallest flip. Empty when no flip raises the
// loss above the unperturbed one.
inline std::optional<EdgeFlip> best_single_flip(const TextAttributedGraph& g, const FeatureMatrix& x,
                                                const SurrogateParams& s, NodeId target) {
  const double base = -target_margin(g, x, s, target);
  double best = -std::numeric_limits<double>::infinity();
  std::optional<EdgeFlip> best_flip;
  for (const auto& f : nettack_candidates(g, target)) {
    const std::vector<EdgeFlip> one{f};
    const double loss = -target_margin(apply_flips(g, one), x, s, target);
    if (loss > best) {
      best = loss;
      best_flip = f;
    }
  }
  if (!(best > base)) return std::nullopt;
  return best_flip;
}

// Placeholders of a (d, k) tree recounted from degrees alone: slot p is
// real iff its parent is real and the parent has more than (p's index
// among its siblings) neighbours.
inline std::size_t recount_placeholders(const TextAttributedGraph& g, const ComputationTree& t) {
  std::size_t count = 0;
  std::vector<bool> real(t.positions(), false);
  real[0] = true;
  for (std::size_t p = 1; p < t.positions(); ++p) {
    const std::size_t parent = t.parent(p);
    const std::size_t sibling = (p - 1) % static_cast<std::size_t>(t.fanout);
    real[p] = real[parent] && g.degree(t.slots[parent]) > sibling;
    count += real[p] ? 0 : 1;
  }
  return count;
}

// Max relative error of the symmetric meta-gradient against central
// differences over `samples` random off-diagonal pairs.
inline double meta_gradient_fd_error(const MetaProblem& problem, Matrix a, int samples, double h,
                                     std::uint64_t seed) {
  Matrix grad;
  (void)meta_gradient(problem, a, &grad);
  const auto n = a.rows();
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto u = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    auto v = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
    if (v >= u) ++v;
    const double saved = a(u, v);
    a(u, v) = a(v, u) = saved + h;
    const double up = meta_gradient(problem, a, nullptr);
    a(u, v) = a(v, u) = saved - h;
    const double down = meta_gradient(problem, a, nullptr);
    a(u, v) = a(v, u) = saved;
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(grad(u, v) - fd) / std::max({std::abs(grad(u, v)), std::abs(fd), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace tagraid::testing
