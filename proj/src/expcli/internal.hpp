#pragma once

// Helpers shared by the command implementations.

#include "fdaloha/expcli.hpp"

#include <optional>

namespace fdaloha::cli {

// Copies the resolved settings into the table's header comments.
void attach_config(CsvTable& table, const Config& cfg);

// Seed for the point-th grid point of a sweep.
std::uint64_t point_seed(std::uint64_t master, std::size_t point);

// Analytical metrics for a stable operating point; nullopt when the
// fixed point is missing or the queues are unstable.
std::optional<AnalyticalMetrics> analytic_point(const SystemParams& p, const SpatialConstants& sc);

} // namespace fdaloha::cli
