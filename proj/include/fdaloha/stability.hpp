#pragma once

// Stability region, stable-regime success probability, queue metrics and
// stability-optimal operating points for buffered q-persistent Aloha with
// full-duplex (FD) or half-duplex time-sharing (HD) clusters.

#include "fdaloha/spatial.hpp"

#include <functional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fdaloha {

enum class Duplex { fd, hd };

// perfect: ideal self-interference cancellation.
// bound:   residual eta * P added at every receiver (lower-bound system).
// actual:  residual eta * P added only when the receiver is transmitting.
enum class IcModel { perfect, bound, actual };

// Whether a result is multiplied by the imperfect-IC penalty beta.
enum class IcScaling { ideal, beta_scaled };

std::string_view to_string(Duplex d);
std::string_view to_string(IcModel m);

class InstabilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct SystemParams {
    double lambda = 0.2;  // clusters per unit area
    double a = 0.13;      // per-node per-slot arrival probability
    double q = 0.5;       // access probability
    ChannelParams ch;
    double eta = 0.0;     // residual self-interference fraction
    Duplex duplex = Duplex::fd;
    IcModel ic_model = IcModel::perfect;

    void validate() const;

    // eta with the perfect model forced to zero.
    [[nodiscard]] double effective_eta() const { return ic_model == IcModel::perfect ? 0.0 : eta; }
};

struct ModeProbs {
    double p0 = 1.0;  // no transmission in the cluster
    double p1 = 0.0;  // exactly one member transmits
    double p2 = 0.0;  // both members transmit (FD link)

    [[nodiscard]] double fd_link_fraction() const;
};

struct AnalyticalMetrics {
    double ps = 1.0;
    double pi0 = 1.0;
    double n_mean = 0.0;
    double delay = 1.0;
    bool delay_is_bound = false;  // HD delay is the upper bound only
    ModeProbs mode_probs;
};

struct StabilityPoint {
    double q_star = 1.0;
    double a_star = 0.0;
    double tau_star = 0.0;
};

enum class FixedPointStatus { ok, no_solution };

struct FixedPointResult {
    FixedPointStatus status = FixedPointStatus::no_solution;
    double ps = 0.0;        // stable success probability
    double load = 0.0;      // x = a / ps, the per-node transmit probability q (1 - pi0) (FD)
    double residual = 0.0;  // |g(x) - a|

    [[nodiscard]] bool ok() const { return status == FixedPointStatus::ok; }
};

// Relative offset used for evaluations "at" a boundary point a* (a* - eps).
inline constexpr double boundary_backoff = 1e-6;

// Right-hand side of the FD stability condition a < q exp(-lambda q (2 O1 + q (O2 - 2 O1))).
double fd_stability_bound(double q, double lambda, const SpatialConstants& sc,
                          IcScaling scaling = IcScaling::ideal);

// a < q/2 exp(-lambda q O1).
double hd_stability_bound(double q, double lambda, double omega1);

// First positive stationary point of x exp(-lambda (2 O1 x + c x^2)), or
// +inf when the function is increasing on (0, inf).
double fd_load_peak(double lambda, const SpatialConstants& sc);

StabilityPoint fd_optimal_access(double lambda, const SpatialConstants& sc,
                                 IcScaling scaling = IcScaling::ideal);
StabilityPoint hd_optimal_access(double lambda, double omega1);

// Largest-ps root of ps = beta exp(-lambda (2 O1 a/ps + (O2 - 2 O1) a^2/ps^2)),
// beta = 1 unless scaling is beta_scaled.
FixedPointResult fd_success_fixed_point(double a, double lambda, const SpatialConstants& sc,
                                        IcScaling scaling = IcScaling::ideal);

// Largest-ps root of ps = exp(-2 lambda O1 a / ps).
FixedPointResult hd_success_fixed_point(double a, double lambda, double omega1);

double saturated_success_prob(double q, double lambda, const SpatialConstants& sc,
                              IcScaling scaling = IcScaling::ideal);
double hd_saturated_success_prob(double q, double lambda, double omega1);

ModeProbs link_mode_probs(double q, double pi0);

AnalyticalMetrics fd_queue_metrics(double a, double q, double ps);
AnalyticalMetrics hd_queue_metrics(double a, double q, double ps_hd);

enum class BoundaryMode { fd, hd, fd_bound_ic };

std::string_view to_string(BoundaryMode m);

struct BoundaryRow {
    double lambda = 0.0;
    StabilityPoint point;
    double fd_link_frac = 0.0;  // p2 / (p1 + p2) at (q*, a*); 0 for HD
};

using SpatialResolver = std::function<SpatialConstants(const ChannelParams&)>;

std::vector<BoundaryRow> sweep_boundary(BoundaryMode mode, std::span<const double> lambda_grid,
                                        const ChannelParams& ch, const SpatialResolver& resolver);

} // namespace fdaloha
