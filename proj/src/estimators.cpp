#include "fdaloha/estimators.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdaloha {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

template <class Getter>
Interval metric_ci(std::span<const ReplicationSummary> runs, Getter&& get, double level)
{
    std::vector<double> values;
    values.reserve(runs.size());
    for (const auto& run : runs) {
        values.push_back(get(run));
    }
    return mean_ci(values, level);
}

bool within_slack(double analytic, const Interval& est, double rel_slack)
{
    if (!std::isfinite(est.mean)) {
        return false;
    }
    const double scale = std::abs(est.mean);
    return std::abs(analytic - est.mean) <= rel_slack * scale;
}

} // namespace

double t_quantile(double level, std::size_t df)
{
    if (df == 0) {
        return nan;
    }
    boost::math::students_t dist(static_cast<double>(df));
    return boost::math::quantile(dist, 0.5 * (1.0 + level));
}

Interval mean_ci(std::span<const double> values, double level)
{
    std::vector<double> v;
    v.reserve(values.size());
    for (const double x : values) {
        if (std::isfinite(x)) {
            v.push_back(x);
        }
    }
    std::sort(v.begin(), v.end());

    Interval out;
    out.n = v.size();
    if (v.empty()) {
        out.mean = nan;
        out.half_width = nan;
        return out;
    }
    double sum = 0.0;
    for (const double x : v) {
        sum += x;
    }
    const double n = static_cast<double>(v.size());
    out.mean = sum / n;
    if (v.size() < 2) {
        out.half_width = nan;
        return out;
    }
    double ss = 0.0;
    for (const double x : v) {
        ss += (x - out.mean) * (x - out.mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    out.half_width = t_quantile(level, v.size() - 1) * sd / std::sqrt(n);
    return out;
}

MetricEstimates aggregate(std::span<const ReplicationSummary> summaries, double level)
{
    if (summaries.size() < 2) {
        throw InsufficientRunsError("aggregate needs at least two replications");
    }
    MetricEstimates est;
    est.n_runs = summaries.size();
    est.ps = metric_ci(summaries, [](const auto& s) { return s.degenerate ? nan : s.ps_hat; }, level);
    est.nonempty = metric_ci(summaries, [](const auto& s) { return s.nonempty_fraction; }, level);
    // Per-run mean delays keep the replications as the i.i.d. units.
    est.delay = metric_ci(summaries, [](const auto& s) { return s.mean_delay; }, level);
    est.tput_density =
        metric_ci(summaries, [](const auto& s) { return s.throughput_density; }, level);
    for (std::size_t i = 0; i < 3; ++i) {
        est.mode_freqs[i] =
            metric_ci(summaries, [i](const auto& s) { return s.mode_freqs[i]; }, level);
    }
    return est;
}

bool ComparisonReport::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const MetricCheck* ComparisonReport::find(const std::string& metric) const
{
    for (const auto& c : checks) {
        if (c.metric == metric) {
            return &c;
        }
    }
    return nullptr;
}

ComparisonReport compare(const MetricEstimates& est, const AnalyticalMetrics& ana, Duplex duplex,
                         double rel_slack)
{
    ComparisonReport report;
    auto check = [&](std::string name, double analytic, const Interval& e) {
        const bool pass = (std::isfinite(e.half_width) && e.contains(analytic))
                          || within_slack(analytic, e, rel_slack);
        report.checks.push_back({std::move(name), analytic, e, pass});
    };

    check("ps", ana.ps, est.ps);
    check("nonempty", 1.0 - ana.pi0, est.nonempty);
    if (duplex == Duplex::hd && ana.delay_is_bound) {
        const double lower = std::isfinite(est.delay.half_width) ? est.delay.lo() : est.delay.mean;
        report.checks.push_back({"delay", ana.delay, est.delay, ana.delay >= lower});
    } else {
        check("delay", ana.delay, est.delay);
    }
    check("p0", ana.mode_probs.p0, est.mode_freqs[0]);
    check("p1", ana.mode_probs.p1, est.mode_freqs[1]);
    check("p2", ana.mode_probs.p2, est.mode_freqs[2]);
    return report;
}

} // namespace fdaloha
