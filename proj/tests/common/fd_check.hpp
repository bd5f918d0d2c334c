#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tagraid::testing {

struct FdReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Central differences against an analytic gradient. The relative error of
// entry i is |g - fd| / max(|g|, |fd|, floor); the floor keeps entries whose
// true gradient is ~0 from dividing rounding noise by itself.
inline FdReport fd_check(const std::function<double(std::span<const double>, std::vector<double>*)>& f,
                         std::vector<double> x, std::span<const std::size_t> indices, double h = 1e-5,
                         double floor = 1e-6) {
  std::vector<double> grad;
  (void)f(x, &grad);
  FdReport r;
  for (std::size_t i : indices) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x, nullptr);
    x[i] = saved - h;
    const double down = f(x, nullptr);
    x[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double err = std::abs(grad[i] - fd) / std::max({std::abs(grad[i]), std::abs(fd), floor});
    if (err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_index = i;
    }
    ++r.checked;
  }
  return r;
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

}  // namespace tagraid::testing
