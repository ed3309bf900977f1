#pragma once

#include "slotgraph/gradcheck.hpp"

#include <vector>

namespace slotgraph::gradsuites {

/// Finite-difference verification of every differentiable module at tiny
/// dimensions: encoder, graph attention, label attention, intent head,
/// gate/fusion, BIO tagger, span typer, and the end-to-end joint loss.
std::vector<GradCheckReport> run_all(std::uint64_t seed = 1,
                                     double tol = 1e-4,
                                     std::size_t max_entries_per_param = 25);

/// Harness sanity: runs one suite against a deliberately corrupted analytic
/// gradient and reports whether the corruption was flagged.
bool detects_corrupted_gradient(std::uint64_t seed = 1);

}  // namespace slotgraph::gradsuites
