#include "slotgraph/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace slotgraph {

double grad_rel_err(double analytic, double numeric) {
  double denom = std::max(std::abs(analytic), std::abs(numeric));
  // Central differences with step 1e-5 carry ~1e-11 absolute roundoff, so
  // gradients below ~1e-6 cannot be resolved to 1e-4 relative error;
  // treat such pairs as agreeing.
  if (denom < 1e-6) return 0.0;
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport gradcheck(ad::ParamStore& store,
                          const std::function<double(bool)>& loss_fn,
                          const std::string& group,
                          double tol,
                          double step,
                          std::size_t max_entries_per_param,
                          std::uint64_t seed) {
  GradCheckReport rep;
  rep.group = group;

  store.zero_grad();
  loss_fn(true);

  std::mt19937_64 gen(seed);
  for (auto& p : store.items()) {
    if (!p->trainable) continue;
    std::vector<long> idx(static_cast<std::size_t>(p->value.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<long>(k);
    if (max_entries_per_param > 0 && idx.size() > max_entries_per_param) {
      std::shuffle(idx.begin(), idx.end(), gen);
      idx.resize(max_entries_per_param);
    }
    for (long flat : idx) {
      long i = flat % p->value.rows();
      long j = flat / p->value.rows();
      double orig = p->value(i, j);
      p->value(i, j) = orig + step;
      double up = loss_fn(false);
      p->value(i, j) = orig - step;
      double down = loss_fn(false);
      p->value(i, j) = orig;
      double numeric = (up - down) / (2.0 * step);
      double analytic = p->grad(i, j);
      double err = grad_rel_err(analytic, numeric);
      ++rep.checked;
      if (err > rep.worst_rel_err) {
        rep.worst_rel_err = err;
        rep.worst_at = p->name + "(" + std::to_string(i) + "," +
                       std::to_string(j) + ")";
      }
    }
  }
  rep.pass = rep.worst_rel_err < tol;
  return rep;
}

}  // namespace slotgraph
