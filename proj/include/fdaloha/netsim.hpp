#pragma once

// Slot-level Monte Carlo simulator of buffered FD/HD Aloha clusters on a
// torus. Each slot runs, in order: relocation of every cluster, the
// q-persistent access decision, SIR-threshold reception, and packet
// generation.

#include "fdaloha/rng.hpp"
#include "fdaloha/stability.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace fdaloha {

struct RegionConfig {
    double side_length = 0.0;     // torus edge; 0 selects auto-sizing
    double min_clusters = 500.0;  // auto-sizing target for lambda * L^2
};

// How interference at a receiver is accumulated.
enum class InterferenceModel {
    // Every concurrent transmitter on the torus at its nearest image.
    exact,
    // Transmitters within the cutoff radius exactly; the rest of the plane
    // replaced by its mean, density * 2 pi R^(2 - alpha) / (alpha - 2).
    near_field,
};

struct SimOptions {
    std::int64_t horizon = 20000;
    std::int64_t warmup = 5000;
    bool saturated = false;             // queues never empty; no queue tracking
    std::uint32_t initial_backlog = 0;  // packets preloaded in every queue at t = 0
    InterferenceModel interference = InterferenceModel::near_field;
    double cutoff_factor = 6.0;         // cutoff radius in units of r * max(1, theta^(1/alpha))

    void validate() const;

    static SimOptions with_horizon(std::int64_t horizon);
};

double cutoff_radius(const ChannelParams& ch, const SimOptions& opt);

// Torus edge for the given density: at least sqrt(min_clusters / lambda),
// 20 r theta^(1/alpha), and twice the interference cutoff.
double resolve_side_length(const RegionConfig& region, double lambda, const ChannelParams& ch,
                           const SimOptions& opt);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct ClusterGeometry {
    Vec2 center;
    double angle = 0.0;  // peer at center + r e^{j angle}
};

// Node 2i is the centre of cluster i, node 2i + 1 its peer; the addressee
// of node k is node k ^ 1.
constexpr std::size_t peer_of(std::size_t node) { return node ^ 1U; }
constexpr std::size_t cluster_of(std::size_t node) { return node >> 1U; }

struct NetworkState {
    double side_length = 0.0;
    std::vector<ClusterGeometry> clusters;
    // Per-node FIFO of packet stamps: the first slot each packet could be served.
    std::vector<std::deque<std::int64_t>> queues;
    std::int64_t slot_index = 0;
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;

    [[nodiscard]] std::size_t node_count() const { return 2 * clusters.size(); }
    [[nodiscard]] Vec2 node_position(std::size_t node, double r) const;
};

double torus_distance_sq(Vec2 a, Vec2 b, double side);

NetworkState sample_topology(double lambda, double side_length, std::uint64_t seed,
                             std::uint64_t replication);

// State with hand-placed clusters and empty queues.
NetworkState make_state(double side_length, std::vector<ClusterGeometry> clusters,
                        std::uint64_t seed = 0, std::uint64_t replication = 0);

struct SlotReport {
    std::int64_t slot = 0;
    std::size_t attempts = 0;
    std::size_t successes = 0;
    std::size_t fd_links = 0;  // clusters with both members transmitting
    std::size_t hd_links = 0;  // clusters with exactly one transmitting
    std::vector<std::int64_t> completed_delays;
    std::size_t nonempty_nodes = 0;  // N_i(t) > 0 at the access decision
    std::size_t nodes = 0;
    std::uint64_t queued_packets = 0;  // sum of N_i(t) at the access decision
    std::size_t arrivals = 0;

    [[nodiscard]] double nonempty_fraction() const
    {
        return nodes ? static_cast<double>(nonempty_nodes) / static_cast<double>(nodes) : 0.0;
    }
};

SlotReport advance_slot(NetworkState& state, const SystemParams& params, const SimOptions& opt);

struct Reception {
    std::size_t transmitter = 0;
    std::size_t receiver = 0;
    double sir = 0.0;
    bool success = false;
};

// Fading gain of the link transmitter -> receiver in the current slot. For
// each receiver the signal link is queried first.
using FadingFn = std::function<double(std::size_t receiver, std::size_t transmitter)>;

// The fading the simulator itself draws in the given slot.
FadingFn stream_fading(std::uint64_t seed, std::uint64_t replication, std::int64_t slot);

// SIR and decoding outcome for every transmitting node under the current
// geometry of `state`. transmitting.size() must equal state.node_count().
std::vector<Reception> evaluate_receptions(const NetworkState& state,
                                           const std::vector<bool>& transmitting,
                                           const SystemParams& params, const SimOptions& opt,
                                           const FadingFn& fading);

struct ReplicationSummary {
    std::uint64_t replication = 0;
    std::size_t clusters = 0;
    double side_length = 0.0;
    std::int64_t measured_slots = 0;
    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    bool degenerate = false;  // no attempts after warmup
    double ps_hat = 0.0;
    double nonempty_fraction = 0.0;
    double mean_delay = 0.0;  // NaN when no packet completed
    std::uint64_t completed_packets = 0;
    double throughput_density = 0.0;  // successes per slot per unit area
    std::array<double, 3> mode_freqs{1.0, 0.0, 0.0};
    double mean_queue = 0.0;
};

ReplicationSummary run_replication(const SystemParams& params, const RegionConfig& region,
                                   const SimOptions& opt, std::uint64_t seed,
                                   std::uint64_t replication);

// Replications 0..n_runs-1 fanned out over up to `jobs` threads; the result
// is ordered by replication index.
std::vector<ReplicationSummary> run_replications(const SystemParams& params,
                                                 const RegionConfig& region, const SimOptions& opt,
                                                 std::uint64_t seed, std::size_t n_runs,
                                                 unsigned jobs = 1);

enum class Verdict { stable, unstable, inconclusive };

std::string_view to_string(Verdict v);

struct ProbeConfig {
    std::int64_t horizon = 20000;
    std::size_t n_seeds = 8;
    std::uint64_t seed = 1;
    std::uint32_t initial_backlog = 50;
    // Slopes within +-drift_tolerance packets/slot count as zero drift.
    double drift_tolerance = 1e-3;
    // Largest second-half mean queue length still called bounded.
    double mean_queue_cap = 50.0;
    unsigned jobs = 1;

    void validate() const;
};

struct StabilityVerdict {
    Verdict verdict = Verdict::inconclusive;
    double slope_mean = 0.0;  // packets per node per slot
    double slope_lo = 0.0;
    double slope_hi = 0.0;
    double mean_queue = 0.0;  // second-half mean over seeds
    std::vector<double> slopes;
};

// Least-squares slope of series[i] against i.
double trend_slope(std::span<const double> series);

StabilityVerdict probe_stability(const SystemParams& params, const RegionConfig& region,
                                 const SimOptions& base, const ProbeConfig& probe);

} // namespace fdaloha
