#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sentrep/rng.hpp"
#include "sentrep/tensor.hpp"

namespace sentrep {

struct GradCheckResult {
  std::map<std::string, double> per_tensor;  // max relative error per tensor
  double worst = 0.0;
  std::string worst_tensor;
};

// Central-difference oracle for analytic gradients. grad_fn() must zero the
// parameter gradients, run forward/backward once, and leave d(loss)/d(theta)
// in each tensor's g; loss_fn() evaluates the loss at the current parameter
// values. Both must be deterministic (fixed data, dropout off) and should run
// in 64-bit precision. Per tensor, up to max_coords coordinates are sampled;
// relative error is |a - n| / max(|a|, |n|, 1e-8).
inline GradCheckResult finite_diff_check(
    const std::vector<std::pair<std::string, Tensor<double>*>>& params,
    const std::function<double()>& loss_fn,
    const std::function<void()>& grad_fn, double eps = 1e-5,
    size_t max_coords = 200, uint64_t seed = 1234) {
  grad_fn();
  GradCheckResult res;
  Rng rng(seed);
  for (const auto& [name, t] : params) {
    if (t->g.size() != t->v.size()) {
      throw ValueError("no gradient recorded for " + name);
    }
    size_t n = t->numel();
    std::vector<size_t> coords(n);
    for (size_t i = 0; i < n; ++i) coords[i] = i;
    if (n > max_coords) {
      Rng local = rng.fork(fnv1a64(name.data(), name.size()));
      local.shuffle(coords);
      coords.resize(max_coords);
    }
    double worst = 0.0;
    for (size_t c : coords) {
      double saved = t->v[c];
      t->v[c] = saved + eps;
      double up = loss_fn();
      t->v[c] = saved - eps;
      double down = loss_fn();
      t->v[c] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("non-finite loss while perturbing " + name + "[" +
                           std::to_string(c) + "]");
      }
      double numeric = (up - down) / (2.0 * eps);
      double analytic = t->g[c];
      double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      double rel = std::fabs(analytic - numeric) / denom;
      if (rel > worst) worst = rel;
    }
    res.per_tensor[name] = worst;
    if (worst > res.worst) {
      res.worst = worst;
      res.worst_tensor = name;
    }
  }
  return res;
}

}  // namespace sentrep
