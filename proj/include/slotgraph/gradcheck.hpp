#pragma once

#include "slotgraph/autodiff.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace slotgraph {

struct GradCheckReport {
  std::string group;
  double worst_rel_err = 0.0;
  std::string worst_at;
  std::size_t checked = 0;
  bool pass = false;
};

/// Compares analytic gradients against central finite differences.
///
/// `loss_fn` must evaluate the scalar loss from the current parameter values.
/// When `with_grad` is true it must also run backward so that gradients
/// accumulate into `store` (which is zeroed beforehand).
/// `max_entries_per_param` caps the number of probed coordinates per tensor
/// (all of them when 0); coordinates are sampled with `seed` so reruns probe
/// the same ones.
GradCheckReport gradcheck(
    ad::ParamStore& store,
    const std::function<double(bool with_grad)>& loss_fn,
    const std::string& group,
    double tol = 1e-4,
    double step = 1e-5,
    std::size_t max_entries_per_param = 0,
    std::uint64_t seed = 0);

/// Relative error with an absolute floor for near-zero gradient pairs.
double grad_rel_err(double analytic, double numeric);

}  // namespace slotgraph
