#ifndef MLSA_GRADCHECK_HPP
#define MLSA_GRADCHECK_HPP

#include <functional>
#include <string>

#include "mlsa/rng.hpp"
#include "mlsa/tensor.hpp"

namespace mlsa {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_coord = 0;
  std::size_t coords_checked = 0;
};

/// Compares analytic gradients against central finite differences
/// (f(x+h) - f(x-h)) / 2h on a seeded random sample of coordinates
/// (all coordinates when a tensor is smaller than the sample size).
/// Relative error is |g_ad - g_fd| / max(|g_ad| + |g_fd|, 1e-8).
/// Run at double precision; loss_fn must be deterministic in params
/// (any dropout mask must be held fixed across evaluations).
inline GradCheckResult grad_check(
    const std::function<double(const ParamSet<double>&)>& loss_fn,
    const ParamSet<double>& params, const ParamSet<double>& analytic_grads,
    double h = 1e-5, std::size_t coords_per_tensor = 200,
    std::uint64_t seed = 12345) {
  if (params.size() != analytic_grads.size())
    throw Error("grad_check: parameter/gradient count mismatch");

  GradCheckResult res;
  ParamSet<double> probe = params;
  Rng rng(seed);

  for (std::size_t p = 0; p < params.size(); ++p) {
    const Tensor<double>& w = params.tensors[p];
    const Tensor<double>& g = analytic_grads.tensors[p];
    if (!w.same_shape(g))
      throw Error("grad_check: gradient shape mismatch for '" + params.names[p] +
                  "'");
    std::size_t n = w.numel();
    std::vector<std::size_t> coords;
    if (n <= coords_per_tensor) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      Rng local = rng.fork("coords", p);
      for (std::size_t i = 0; i < coords_per_tensor; ++i)
        coords.push_back(local.next_below(n));
    }

    for (std::size_t c : coords) {
      double orig = probe.tensors[p].data[c];
      probe.tensors[p].data[c] = orig + h;
      double fp = loss_fn(probe);
      probe.tensors[p].data[c] = orig - h;
      double fm = loss_fn(probe);
      probe.tensors[p].data[c] = orig;

      double fd = (fp - fm) / (2.0 * h);
      double ad = g.data[c];
      double rel = std::abs(ad - fd) / std::max(std::abs(ad) + std::abs(fd), 1e-8);
      ++res.coords_checked;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = params.names[p];
        res.worst_coord = c;
      }
    }
  }
  return res;
}

} // namespace mlsa

#endif
