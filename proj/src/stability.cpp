#include "fdaloha/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fdaloha {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double load_tolerance = 1e-14;

void require_access(double q)
{
    if (!(q > 0.0 && q <= 1.0)) {
        throw DomainError("access probability q must lie in (0, 1]");
    }
}

void require_density(double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("cluster density lambda must be non-negative and finite");
    }
}

void require_arrival(double a)
{
    if (!(a >= 0.0 && a < 1.0)) {
        throw DomainError("arrival probability a must lie in [0, 1)");
    }
}

double beta_of(const SpatialConstants& sc, IcScaling scaling)
{
    return scaling == IcScaling::beta_scaled ? sc.beta : 1.0;
}

// x exp(-lambda (2 O1 x + c x^2))
double fd_load_map(double x, double lambda, const SpatialConstants& sc)
{
    return x * std::exp(-lambda * (2.0 * sc.omega1 * x + sc.pair_correction() * x * x));
}

// Smallest positive root of 1 - b x - c2 x^2 = 0 with b > 0, or +inf.
double first_stationary_point(double b, double c2)
{
    const double disc = b * b + 4.0 * c2;
    if (disc < 0.0) {
        return inf;
    }
    return 2.0 / (b + std::sqrt(disc));
}

// Bisection for the smallest root of map(x) = target on [0, hi], map
// increasing on [0, hi] and map(0) = 0.
template <class Map>
FixedPointResult solve_increasing(Map&& map, double target, double hi)
{
    FixedPointResult res;
    const double top = map(hi);
    if (target > top) {
        // Treat rounding-level excess at a double root as the root itself.
        if (target - top > 1e-12 * std::max(1.0, top)) {
            res.status = FixedPointStatus::no_solution;
            return res;
        }
        res.status = FixedPointStatus::ok;
        res.load = hi;
        res.residual = std::abs(top - target);
        return res;
    }
    double lo = 0.0;
    int iterations = 0;
    while (hi - lo > load_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (map(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (++iterations > 200) {
            throw ConvergenceError("fixed-point bisection exceeded its iteration budget");
        }
    }
    res.status = FixedPointStatus::ok;
    res.load = 0.5 * (lo + hi);
    res.residual = std::abs(map(res.load) - target);
    return res;
}

} // namespace

std::string_view to_string(Duplex d)
{
    return d == Duplex::fd ? "fd" : "hd";
}

std::string_view to_string(IcModel m)
{
    switch (m) {
    case IcModel::perfect:
        return "perfect";
    case IcModel::bound:
        return "bound";
    case IcModel::actual:
        return "actual";
    }
    return "perfect";
}

std::string_view to_string(BoundaryMode m)
{
    switch (m) {
    case BoundaryMode::fd:
        return "fd";
    case BoundaryMode::hd:
        return "hd";
    case BoundaryMode::fd_bound_ic:
        return "fd_ic";
    }
    return "fd";
}

void SystemParams::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw DomainError("cluster density lambda must be positive");
    }
    require_arrival(a);
    require_access(q);
    ch.validate();
    if (!(eta >= 0.0 && eta < 1.0)) {
        throw DomainError("residual self-interference fraction eta must lie in [0, 1)");
    }
}

double ModeProbs::fd_link_fraction() const
{
    const double active = p1 + p2;
    return active > 0.0 ? p2 / active : 0.0;
}

double fd_stability_bound(double q, double lambda, const SpatialConstants& sc, IcScaling scaling)
{
    require_access(q);
    require_density(lambda);
    const double ideal = fd_load_map(q, lambda, sc);
    return scaling == IcScaling::beta_scaled ? sc.beta * ideal : ideal;
}

double hd_stability_bound(double q, double lambda, double omega1)
{
    require_access(q);
    require_density(lambda);
    return 0.5 * q * std::exp(-lambda * q * omega1);
}

double fd_load_peak(double lambda, const SpatialConstants& sc)
{
    require_density(lambda);
    if (lambda == 0.0) {
        return inf;
    }
    return first_stationary_point(2.0 * lambda * sc.omega1, 2.0 * lambda * sc.pair_correction());
}

StabilityPoint fd_optimal_access(double lambda, const SpatialConstants& sc, IcScaling scaling)
{
    require_density(lambda);
    StabilityPoint p;
    p.q_star = std::min(1.0, fd_load_peak(lambda, sc));
    p.a_star = fd_stability_bound(p.q_star, lambda, sc, scaling);
    p.tau_star = 2.0 * lambda * p.a_star;
    return p;
}

StabilityPoint hd_optimal_access(double lambda, double omega1)
{
    require_density(lambda);
    StabilityPoint p;
    const double scaled = lambda * omega1;
    p.q_star = scaled <= 1.0 ? 1.0 : 1.0 / scaled;
    p.a_star = hd_stability_bound(p.q_star, lambda, omega1);
    p.tau_star = 2.0 * lambda * p.a_star;
    return p;
}

FixedPointResult fd_success_fixed_point(double a, double lambda, const SpatialConstants& sc,
                                        IcScaling scaling)
{
    require_arrival(a);
    require_density(lambda);
    const double beta = beta_of(sc, scaling);
    if (a == 0.0) {
        return {FixedPointStatus::ok, beta, 0.0, 0.0};
    }
    // With x = a / ps the equation reads beta * g(x) = a. Loads above 1
    // would put p2 = x^2 above 1 and are not physical.
    const double hi = std::min(1.0, fd_load_peak(lambda, sc));
    auto map = [&](double x) { return beta * fd_load_map(x, lambda, sc); };
    FixedPointResult res = solve_increasing(map, a, hi);
    if (res.ok()) {
        res.ps = res.load > 0.0 ? a / res.load : beta;
    }
    return res;
}

FixedPointResult hd_success_fixed_point(double a, double lambda, double omega1)
{
    require_arrival(a);
    require_density(lambda);
    if (a == 0.0) {
        return {FixedPointStatus::ok, 1.0, 0.0, 0.0};
    }
    // x = a / ps; each node is active on half of the slots, so 2x <= 1.
    const double peak = lambda * omega1 > 0.0 ? 1.0 / (2.0 * lambda * omega1) : inf;
    const double hi = std::min(0.5, peak);
    auto map = [&](double x) { return x * std::exp(-2.0 * lambda * omega1 * x); };
    FixedPointResult res = solve_increasing(map, a, hi);
    if (res.ok()) {
        res.ps = a / res.load;
    }
    return res;
}

double saturated_success_prob(double q, double lambda, const SpatialConstants& sc, IcScaling scaling)
{
    require_access(q);
    require_density(lambda);
    const double ideal = std::exp(-lambda * q * (2.0 * sc.omega1 + q * sc.pair_correction()));
    return scaling == IcScaling::beta_scaled ? sc.beta * ideal : ideal;
}

double hd_saturated_success_prob(double q, double lambda, double omega1)
{
    require_access(q);
    require_density(lambda);
    return std::exp(-lambda * q * omega1);
}

ModeProbs link_mode_probs(double q, double pi0)
{
    require_access(q);
    if (!(pi0 >= 0.0 && pi0 <= 1.0)) {
        throw DomainError("empty-queue probability pi0 must lie in [0, 1]");
    }
    const double busy = 1.0 - pi0;
    ModeProbs m;
    m.p1 = 2.0 * q * pi0 * busy + 2.0 * q * (1.0 - q) * busy * busy;
    m.p2 = q * q * busy * busy;
    m.p0 = 1.0 - m.p1 - m.p2;
    return m;
}

AnalyticalMetrics fd_queue_metrics(double a, double q, double ps)
{
    require_arrival(a);
    require_access(q);
    const double service = q * ps;
    if (!(service > a)) {
        std::ostringstream os;
        os << "unstable operating point: q*ps=" << service << " does not exceed a=" << a;
        throw InstabilityError(os.str());
    }
    AnalyticalMetrics m;
    m.ps = ps;
    m.pi0 = 1.0 - a / service;
    m.n_mean = a * (1.0 - a) / (service - a);
    m.delay = (1.0 - a) / (service - a);
    m.delay_is_bound = false;
    m.mode_probs = link_mode_probs(q, m.pi0);
    return m;
}

AnalyticalMetrics hd_queue_metrics(double a, double q, double ps_hd)
{
    require_arrival(a);
    require_access(q);
    const double service = q * ps_hd;
    if (!(service > 2.0 * a)) {
        std::ostringstream os;
        os << "unstable HD operating point: q*ps=" << service << " does not exceed 2a=" << 2.0 * a;
        throw InstabilityError(os.str());
    }
    AnalyticalMetrics m;
    m.ps = ps_hd;
    m.pi0 = 1.0 - 2.0 * a / service;
    m.delay = (3.0 * a - 2.0) / (2.0 * a - service);
    m.delay_is_bound = true;
    // Little's law applied to the delay bound.
    m.n_mean = a * m.delay;
    // Only the member owning the current slot parity may transmit.
    const double active = q * (1.0 - m.pi0);
    m.mode_probs = {1.0 - active, active, 0.0};
    return m;
}

std::vector<BoundaryRow> sweep_boundary(BoundaryMode mode, std::span<const double> lambda_grid,
                                        const ChannelParams& ch, const SpatialResolver& resolver)
{
    if (lambda_grid.empty()) {
        throw DomainError("lambda grid must not be empty");
    }
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > lambda_grid[i - 1])) {
            throw DomainError("lambda grid must be strictly increasing");
        }
    }
    const SpatialConstants sc = resolver(ch);

    std::vector<BoundaryRow> rows;
    rows.reserve(lambda_grid.size());
    for (const double lambda : lambda_grid) {
        BoundaryRow row;
        row.lambda = lambda;
        switch (mode) {
        case BoundaryMode::hd:
            row.point = hd_optimal_access(lambda, sc.omega1);
            row.fd_link_frac = 0.0;
            break;
        case BoundaryMode::fd:
        case BoundaryMode::fd_bound_ic: {
            const auto scaling =
                mode == BoundaryMode::fd ? IcScaling::ideal : IcScaling::beta_scaled;
            row.point = fd_optimal_access(lambda, sc, scaling);
            // Link-mode mix of the ideal system just inside the boundary.
            const StabilityPoint ideal = fd_optimal_access(lambda, sc, IcScaling::ideal);
            const double a = ideal.a_star * (1.0 - boundary_backoff);
            const FixedPointResult fp = fd_success_fixed_point(a, lambda, sc, IcScaling::ideal);
            if (fp.ok()) {
                const double pi0 = std::clamp(1.0 - a / (ideal.q_star * fp.ps), 0.0, 1.0);
                row.fd_link_frac = link_mode_probs(ideal.q_star, pi0).fd_link_fraction();
            }
            break;
        }
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace fdaloha
