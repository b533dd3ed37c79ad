#pragma once

// Spatial contention functionals of a Poisson cluster network with two-node
// clusters under Rayleigh fading and power-law path loss.
//
//   omega1: interference exponent of a cluster with one active transmitter
//   omega2: interference exponent of a cluster with both nodes active
//   beta:   success-probability penalty of residual self-interference
//
// The success probability of a typical link in a network where a density
// lambda1 of clusters has one active node and lambda2 has two is
// exp(-(lambda1 * omega1 + lambda2 * omega2)).

#include <stdexcept>
#include <string>
#include <vector>

namespace fdaloha {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChannelParams {
    double alpha = 4.0;   // path-loss exponent, > 2
    double r = 1.0;       // intra-cluster distance, >= 1
    double theta = 2.0;   // SIR threshold (linear); 0 is accepted as the no-threshold limit
    double power = 1.0;   // transmit power; the SIR does not depend on it

    void validate() const;

    // theta * r^alpha, the scale at which a unit-distance interferer matters.
    [[nodiscard]] double link_scale() const;
};

struct SpatialConstants {
    double omega1 = 0.0;
    double omega2 = 0.0;
    double beta = 1.0;

    // omega2 - 2 * omega1; non-positive for every valid channel.
    [[nodiscard]] double pair_correction() const { return omega2 - 2.0 * omega1; }
    [[nodiscard]] SpatialConstants ideal() const { return {omega1, omega2, 1.0}; }
};

// Compactification of u in [0, inf) onto t in [0, 1), u measured in units
// of the link scale.
enum class OuterMapping {
    rational,        // u = t / (1 - t)
    power_rational,  // u = (t / (1 - t))^k, k = max(1, 2 / (alpha - 2))
};

struct QuadratureConfig {
    double rel_tol = 1e-8;
    int inner_nodes = 64;
    OuterMapping mapping = OuterMapping::power_rational;
    unsigned max_depth = 25;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    double l1_norm = 0.0;
};

// Gauss-Legendre rule on [lo, hi].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    static GaussLegendreRule on_interval(int n, double lo, double hi);

    template <class F>
    double integrate(F&& f) const
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sum += weights[i] * f(nodes[i]);
        }
        return sum;
    }
};

// Laplace-functional kernel f(d) = s d^-alpha / (1 + s d^-alpha), written
// as s / (s + d^alpha) so that it is well defined at d = 0.
double outage_kernel(double distance_sq, double alpha, double scale);

// pi r^2 theta^(2/alpha) Gamma(1 - 2/alpha) Gamma(1 + 2/alpha)
double omega1(const ChannelParams& ch);

// Nested integral for two concurrently active cluster members.
double omega2(const ChannelParams& ch, const QuadratureConfig& cfg = {});
QuadratureResult omega2_detailed(const ChannelParams& ch, const QuadratureConfig& cfg = {});

// exp(-eta * theta * r^alpha); eta in [0, 1).
double ic_scale_beta(double eta, const ChannelParams& ch);

SpatialConstants spatial_constants(const ChannelParams& ch, double eta = 0.0,
                                   const QuadratureConfig& cfg = {});

} // namespace fdaloha
