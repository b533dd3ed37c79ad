#include "fdaloha/spatial.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace fdaloha {

namespace {

constexpr double pi = std::numbers::pi;

double mapping_exponent(OuterMapping mapping, double alpha)
{
    switch (mapping) {
    case OuterMapping::rational:
        return 1.0;
    case OuterMapping::power_rational:
        // Makes the mapped tail integrand vanish at t = 1 for every alpha > 2.
        return std::max(1.0, 2.0 / (alpha - 2.0));
    }
    return 1.0;
}

} // namespace

void ChannelParams::validate() const
{
    if (!(alpha > 2.0) || !std::isfinite(alpha)) {
        std::ostringstream os;
        os << "path-loss exponent must exceed 2 (got alpha=" << alpha
           << "); the interference functionals diverge otherwise";
        throw DomainError(os.str());
    }
    if (!(r >= 1.0) || !std::isfinite(r)) {
        throw DomainError("intra-cluster distance r must be >= 1");
    }
    if (!(theta >= 0.0) || !std::isfinite(theta)) {
        throw DomainError("SIR threshold theta must be non-negative");
    }
    if (!(power > 0.0) || !std::isfinite(power)) {
        throw DomainError("transmit power must be positive");
    }
}

double ChannelParams::link_scale() const
{
    return theta * std::pow(r, alpha);
}

void QuadratureConfig::validate() const
{
    if (!(rel_tol > 0.0)) {
        throw DomainError("quadrature rel_tol must be positive");
    }
    if (inner_nodes < 16) {
        throw DomainError("quadrature needs at least 16 inner nodes");
    }
}

GaussLegendreRule GaussLegendreRule::on_interval(int n, double lo, double hi)
{
    if (n < 1) {
        throw DomainError("Gauss-Legendre rule needs at least one node");
    }
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));

    const double mid = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo_idx = static_cast<std::size_t>(i);
        const auto hi_idx = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo_idx] = mid - half * z;
        rule.nodes[hi_idx] = mid + half * z;
        rule.weights[lo_idx] = half * w;
        rule.weights[hi_idx] = half * w;
    }
    return rule;
}

double outage_kernel(double distance_sq, double alpha, double scale)
{
    const double d_alpha = std::pow(distance_sq, 0.5 * alpha);
    return scale / (scale + d_alpha);
}

double omega1(const ChannelParams& ch)
{
    ch.validate();
    if (ch.theta == 0.0) {
        return 0.0;
    }
    const double delta = 2.0 / ch.alpha;
    return pi * ch.r * ch.r * std::pow(ch.theta, delta) * std::tgamma(1.0 - delta)
           * std::tgamma(1.0 + delta);
}

QuadratureResult omega2_detailed(const ChannelParams& ch, const QuadratureConfig& cfg)
{
    ch.validate();
    cfg.validate();
    if (ch.theta == 0.0) {
        return {};
    }

    const double alpha = ch.alpha;
    const double r = ch.r;
    const double s = ch.link_scale();
    const double length_unit = r * std::max(1.0, std::pow(ch.theta, 1.0 / alpha));
    const double k = mapping_exponent(cfg.mapping, alpha);
    const auto inner = GaussLegendreRule::on_interval(cfg.inner_nodes, 0.0, pi);

    // Expanded form of 2u (pi - (1 - f(u)) (pi - J(u))), free of cancellation
    // at large u: 2u (pi f(u) + (1 - f(u)) J(u)), J(u) = int_0^pi f(d(u, phi)).
    auto integrand_u = [&](double u) {
        const double fu = outage_kernel(u * u, alpha, s);
        const double j = inner.integrate([&](double phi) {
            const double d_sq = std::max(0.0, u * u + r * r + 2.0 * r * u * std::cos(phi));
            return outage_kernel(d_sq, alpha, s);
        });
        return 2.0 * u * (pi * fu + (1.0 - fu) * j);
    };

    auto integrand_t = [&](double t) {
        if (t <= 0.0 || t >= 1.0) {
            return 0.0;
        }
        const double ratio = t / (1.0 - t);
        const double w = std::pow(ratio, k);
        const double u = length_unit * w;
        // du/dt = unit * k * ratio^(k-1) / (1 - t)^2
        const double jac = length_unit * k * std::pow(ratio, k - 1.0) / ((1.0 - t) * (1.0 - t));
        return integrand_u(u) * jac;
    };

    QuadratureResult out;
    out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        integrand_t, 0.0, 1.0, cfg.max_depth, cfg.rel_tol, &out.error_estimate, &out.l1_norm);

    if (!std::isfinite(out.value) || out.error_estimate > 10.0 * cfg.rel_tol * std::abs(out.value)) {
        std::ostringstream os;
        os << "omega2 quadrature did not converge: value=" << out.value
           << " error estimate=" << out.error_estimate << " (rel_tol " << cfg.rel_tol << ")";
        throw ConvergenceError(os.str());
    }
    return out;
}

double omega2(const ChannelParams& ch, const QuadratureConfig& cfg)
{
    return omega2_detailed(ch, cfg).value;
}

double ic_scale_beta(double eta, const ChannelParams& ch)
{
    if (!(eta >= 0.0 && eta < 1.0)) {
        throw DomainError("residual self-interference fraction eta must lie in [0, 1)");
    }
    ch.validate();
    return std::exp(-eta * ch.link_scale());
}

SpatialConstants spatial_constants(const ChannelParams& ch, double eta, const QuadratureConfig& cfg)
{
    return {omega1(ch), omega2(ch, cfg), ic_scale_beta(eta, ch)};
}

} // namespace fdaloha
