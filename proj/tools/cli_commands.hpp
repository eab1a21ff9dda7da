#pragma once

#include "cli_config.hpp"
#include "cli_output.hpp"

#include <vector>

namespace roughlab::cli {

/// Runs a validated configuration. Rows with pass == false mean a statistical
/// or algebraic check failed; exceptions propagate to the caller.
std::vector<ResultRow> run_subcommand(const RunConfig& cfg);

std::vector<ResultRow> run_lift_check(const RunConfig& cfg);
std::vector<ResultRow> run_estimate(const RunConfig& cfg);
std::vector<ResultRow> run_moments(const RunConfig& cfg);
std::vector<ResultRow> run_homogenize(const RunConfig& cfg);
std::vector<ResultRow> run_ablate(const RunConfig& cfg);

/// sde_steps, or the driver's own resolution rounded up to the 32-interval
/// recording grid.
std::size_t effective_sde_steps(const RunConfig& cfg);

}  // namespace roughlab::cli
