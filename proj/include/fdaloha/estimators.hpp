#pragma once

// Across-replication estimates with Student-t confidence intervals, and
// field-by-field comparison against the analytical model.

#include "fdaloha/netsim.hpp"
#include "fdaloha/stability.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdaloha {

class InsufficientRunsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Interval {
    double mean = 0.0;
    double half_width = 0.0;
    std::size_t n = 0;

    [[nodiscard]] double lo() const { return mean - half_width; }
    [[nodiscard]] double hi() const { return mean + half_width; }
    [[nodiscard]] bool contains(double v) const { return v >= lo() && v <= hi(); }
};

// Two-sided Student-t quantile t_{(1+level)/2, df}.
double t_quantile(double level, std::size_t df);

// Sample mean and t-based CI. Values are summed in sorted order, so the
// result does not depend on the order of the input. NaN entries are
// skipped; fewer than two finite values yield a NaN half-width.
Interval mean_ci(std::span<const double> values, double level = 0.95);

struct MetricEstimates {
    Interval ps;
    Interval nonempty;
    Interval delay;
    Interval tput_density;
    std::array<Interval, 3> mode_freqs;
    std::size_t n_runs = 0;
};

MetricEstimates aggregate(std::span<const ReplicationSummary> summaries, double level = 0.95);

struct MetricCheck {
    std::string metric;
    double analytic = 0.0;
    Interval estimate;
    bool pass = false;
};

struct ComparisonReport {
    std::vector<MetricCheck> checks;

    [[nodiscard]] bool all_pass() const;
    [[nodiscard]] const MetricCheck* find(const std::string& metric) const;
};

// A metric passes when the analytic value lies inside the CI or within
// rel_slack of the estimate. An HD delay bound passes when it is not below
// the estimate's lower CI end.
ComparisonReport compare(const MetricEstimates& est, const AnalyticalMetrics& ana, Duplex duplex,
                         double rel_slack);

} // namespace fdaloha
