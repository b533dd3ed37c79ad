#include "fdaloha/netsim.hpp"

#include "fdaloha/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace fdaloha {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap(double v, double side)
{
    v = std::fmod(v, side);
    if (v < 0.0) {
        v += side;
    }
    return v >= side ? 0.0 : v;
}

// Draws the simulator's own fading: one counter stream per receiver, the
// signal first and then the interferers in visiting order.
class StreamFading {
public:
    StreamFading(std::uint64_t seed, std::uint64_t replication, std::int64_t slot)
        : seed_(seed), replication_(replication), slot_(static_cast<std::uint64_t>(slot))
    {
    }

    // The signal query restarts the receiver's stream.
    double operator()(std::size_t receiver, std::size_t transmitter)
    {
        if (transmitter == peer_of(receiver)) {
            rng_ = CounterRng(StreamKey{seed_, replication_, slot_, StreamTag::fading, receiver});
        }
        return rng_.exponential();
    }

private:
    std::uint64_t seed_;
    std::uint64_t replication_;
    std::uint64_t slot_;
    CounterRng rng_{0};
};

// Interference accumulation with reusable cell lists.
class ReceptionEngine {
public:
    ReceptionEngine(const SystemParams& params, const SimOptions& opt, double side)
        : side_(side),
          alpha_(params.ch.alpha),
          theta_(params.ch.theta),
          signal_gain_(std::pow(params.ch.r, -params.ch.alpha)),
          alpha_is_four_(params.ch.alpha == 4.0),
          eta_(params.effective_eta()),
          ic_(params.ic_model),
          near_field_(opt.interference == InterferenceModel::near_field)
    {
        if (near_field_) {
            const double cutoff = cutoff_radius(params.ch, opt);
            cutoff_sq_ = cutoff * cutoff;
            tail_per_density_ = two_pi * std::pow(cutoff, 2.0 - alpha_) / (alpha_ - 2.0);
            ncell_ = std::max(1, static_cast<int>(std::floor(side / (0.5 * cutoff))));
            cell_size_ = side / ncell_;
            span_ = static_cast<int>(std::ceil(cutoff / cell_size_));
            use_grid_ = 2 * span_ + 1 <= ncell_;
            // Cells that can hold a point within the cutoff, nearest first.
            const double reach = cutoff / cell_size_;
            for (int dy = -span_; dy <= span_; ++dy) {
                for (int dx = -span_; dx <= span_; ++dx) {
                    const double gx = std::max(0, std::abs(dx) - 1);
                    const double gy = std::max(0, std::abs(dy) - 1);
                    const double gap = gx * gx + gy * gy;
                    if (gap < reach * reach) {
                        offsets_.push_back({dx, dy, gap});
                    }
                }
            }
            std::stable_sort(offsets_.begin(), offsets_.end(),
                             [](const CellOffset& a, const CellOffset& b) { return a.gap < b.gap; });
        }
    }

    // With stop_early the accumulation ends once the threshold is missed;
    // the reported sir is then only an upper bound.
    template <class Fading>
    void resolve(std::span<const double> px, std::span<const double> py,
                 std::span<const std::uint32_t> tx_nodes, std::span<const std::uint8_t> is_tx,
                 Fading& fading, std::vector<Reception>& out, bool stop_early = false)
    {
        out.clear();
        if (use_grid_) {
            build_grid(px, py, tx_nodes);
        }
        const double tail_unit = near_field_ ? tail_per_density_ / (side_ * side_) : 0.0;
        const auto n_tx = static_cast<double>(tx_nodes.size());

        for (const std::uint32_t k : tx_nodes) {
            const std::size_t m = peer_of(k);
            const double signal = signal_gain_ * fading(m, k);
            // tail density counts the other transmitters only
            double interference = tail_unit * (n_tx - 1.0 - static_cast<double>(is_tx[m]));
            if (ic_ == IcModel::bound || (ic_ == IcModel::actual && is_tx[m] != 0)) {
                interference += eta_;
            }
            const double limit = stop_early ? signal / theta_
                                            : std::numeric_limits<double>::infinity();
            // returns false once the threshold can no longer be met
            auto visit = [&](std::size_t j) {
                if (j == k || j == m) {
                    return true;
                }
                const double d2 = distance_sq(px[j], py[j], px[m], py[m]);
                if (near_field_ && d2 >= cutoff_sq_) {
                    return true;
                }
                interference += fading(m, j) * path_loss(d2);
                return interference <= limit;
            };
            if (use_grid_) {
                visit_grid(px[m], py[m], visit);
            } else {
                for (const std::uint32_t j : tx_nodes) {
                    if (!visit(j)) {
                        break;
                    }
                }
            }
            Reception rec;
            rec.transmitter = k;
            rec.receiver = m;
            rec.sir = interference > 0.0 ? signal / interference
                                         : std::numeric_limits<double>::infinity();
            rec.success = rec.sir >= theta_;
            out.push_back(rec);
        }
    }

private:
    double distance_sq(double x1, double y1, double x2, double y2) const
    {
        double dx = std::abs(x1 - x2);
        double dy = std::abs(y1 - y2);
        dx = std::min(dx, side_ - dx);
        dy = std::min(dy, side_ - dy);
        return dx * dx + dy * dy;
    }

    double path_loss(double d2) const
    {
        if (alpha_is_four_) {
            return 1.0 / (d2 * d2);
        }
        return std::pow(d2, -0.5 * alpha_);
    }

    int cell_index(double v) const
    {
        return std::clamp(static_cast<int>(v / cell_size_), 0, ncell_ - 1);
    }

    void build_grid(std::span<const double> px, std::span<const double> py,
                    std::span<const std::uint32_t> tx_nodes)
    {
        head_.assign(static_cast<std::size_t>(ncell_) * static_cast<std::size_t>(ncell_), -1);
        next_.resize(px.size());
        // Reverse insertion keeps ascending node order inside each cell.
        for (auto it = tx_nodes.rbegin(); it != tx_nodes.rend(); ++it) {
            const std::uint32_t j = *it;
            const auto cell = static_cast<std::size_t>(cell_index(py[j]) * ncell_ + cell_index(px[j]));
            next_[j] = head_[cell];
            head_[cell] = static_cast<std::int32_t>(j);
        }
    }

    template <class Visit>
    void visit_grid(double x, double y, Visit&& visit) const
    {
        const int cx = cell_index(x);
        const int cy = cell_index(y);
        for (const auto& off : offsets_) {
            const int row = (cy + off.dy + ncell_) % ncell_;
            const int col = (cx + off.dx + ncell_) % ncell_;
            for (std::int32_t j = head_[static_cast<std::size_t>(row * ncell_ + col)]; j >= 0;
                 j = next_[static_cast<std::size_t>(j)]) {
                if (!visit(static_cast<std::size_t>(j))) {
                    return;
                }
            }
        }
    }

    double side_;
    double alpha_;
    double theta_;
    double signal_gain_;
    bool alpha_is_four_;
    double eta_;
    IcModel ic_;
    bool near_field_;
    double cutoff_sq_ = 0.0;
    double tail_per_density_ = 0.0;
    int ncell_ = 1;
    double cell_size_ = 0.0;
    int span_ = 0;
    bool use_grid_ = false;
    struct CellOffset {
        int dx;
        int dy;
        double gap;  // squared cell-unit gap to the home cell
    };
    std::vector<CellOffset> offsets_;
    std::vector<std::int32_t> head_;
    std::vector<std::int32_t> next_;
};

// One replication's slot loop with scratch buffers kept across slots.
class SlotRunner {
public:
    SlotRunner(const SystemParams& params, const SimOptions& opt, double side)
        : params_(params), opt_(opt), engine_(params, opt, side)
    {
    }

    void step(NetworkState& state, SlotReport& report)
    {
        const std::int64_t t = state.slot_index;
        const auto slot_key = static_cast<std::uint64_t>(t);
        const double side = state.side_length;
        const std::size_t n_nodes = state.node_count();
        const double r = params_.ch.r;

        report.slot = t;
        report.attempts = 0;
        report.successes = 0;
        report.fd_links = 0;
        report.hd_links = 0;
        report.completed_delays.clear();
        report.nonempty_nodes = 0;
        report.nodes = n_nodes;
        report.queued_packets = 0;
        report.arrivals = 0;

        // (1) relocation: i.i.d. redraw of every centre and peer angle
        CounterRng reloc(StreamKey{state.seed, state.replication, slot_key, StreamTag::relocation, 0});
        px_.resize(n_nodes);
        py_.resize(n_nodes);
        for (std::size_t i = 0; i < state.clusters.size(); ++i) {
            auto& c = state.clusters[i];
            c.center.x = reloc.uniform() * side;
            c.center.y = reloc.uniform() * side;
            c.angle = reloc.uniform() * two_pi;
            px_[2 * i] = c.center.x;
            py_[2 * i] = c.center.y;
            px_[2 * i + 1] = wrap(c.center.x + r * std::cos(c.angle), side);
            py_[2 * i + 1] = wrap(c.center.y + r * std::sin(c.angle), side);
        }

        // (2) access decision on the queue state N_i(t)
        CounterRng access(StreamKey{state.seed, state.replication, slot_key, StreamTag::access, 0});
        is_tx_.assign(n_nodes, 0);
        tx_nodes_.clear();
        const bool hd = params_.duplex == Duplex::hd;
        const auto parity = static_cast<std::size_t>(t & 1);
        for (std::size_t k = 0; k < n_nodes; ++k) {
            const double u = access.uniform();
            const std::size_t backlog = opt_.saturated ? 1 : state.queues[k].size();
            if (backlog > 0) {
                ++report.nonempty_nodes;
            }
            report.queued_packets += opt_.saturated ? 0 : backlog;
            const bool permitted = !hd || (k & 1U) == parity;
            if (permitted && backlog > 0 && u < params_.q) {
                is_tx_[k] = 1;
                tx_nodes_.push_back(static_cast<std::uint32_t>(k));
            }
        }
        report.attempts = tx_nodes_.size();
        for (std::size_t i = 0; i < state.clusters.size(); ++i) {
            const int active = is_tx_[2 * i] + is_tx_[2 * i + 1];
            if (active == 2) {
                ++report.fd_links;
            } else if (active == 1) {
                ++report.hd_links;
            }
        }

        // (3) reception and head-of-line departure
        StreamFading fading(state.seed, state.replication, t);
        engine_.resolve(px_, py_, tx_nodes_, is_tx_, fading, receptions_, true);
        for (const auto& rec : receptions_) {
            if (!rec.success) {
                continue;
            }
            ++report.successes;
            if (!opt_.saturated) {
                auto& queue = state.queues[rec.transmitter];
                report.completed_delays.push_back(t - queue.front() + 1);
                queue.pop_front();
            }
        }

        // (4) generation; new packets are first eligible in slot t + 1
        if (!opt_.saturated) {
            CounterRng arrivals(
                StreamKey{state.seed, state.replication, slot_key, StreamTag::arrival, 0});
            for (std::size_t k = 0; k < n_nodes; ++k) {
                if (arrivals.uniform() < params_.a) {
                    state.queues[k].push_back(t + 1);
                    ++report.arrivals;
                }
            }
        }
        ++state.slot_index;
    }

private:
    SystemParams params_;
    SimOptions opt_;
    ReceptionEngine engine_;
    std::vector<double> px_;
    std::vector<double> py_;
    std::vector<std::uint8_t> is_tx_;
    std::vector<std::uint32_t> tx_nodes_;
    std::vector<Reception> receptions_;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn)
{
    const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

void preload(NetworkState& state, std::uint32_t backlog)
{
    for (auto& queue : state.queues) {
        queue.assign(backlog, 0);
    }
}

} // namespace

void SimOptions::validate() const
{
    if (horizon <= 0) {
        throw DomainError("simulation horizon must be positive");
    }
    if (warmup < 0 || warmup >= horizon) {
        throw DomainError("warmup must satisfy 0 <= warmup < horizon");
    }
    if (!(cutoff_factor > 0.0)) {
        throw DomainError("interference cutoff factor must be positive");
    }
}

SimOptions SimOptions::with_horizon(std::int64_t horizon)
{
    SimOptions opt;
    opt.horizon = horizon;
    opt.warmup = horizon / 4;
    return opt;
}

double cutoff_radius(const ChannelParams& ch, const SimOptions& opt)
{
    return opt.cutoff_factor * ch.r * std::max(1.0, std::pow(ch.theta, 1.0 / ch.alpha));
}

double resolve_side_length(const RegionConfig& region, double lambda, const ChannelParams& ch,
                           const SimOptions& opt)
{
    const double min_side = std::max(
        10.0 * ch.r * (1.0 + 1e-9),
        opt.interference == InterferenceModel::near_field ? 2.0 * cutoff_radius(ch, opt) : 0.0);
    if (region.side_length > 0.0) {
        if (region.side_length < min_side) {
            throw DomainError("torus side length too small for the link distance and cutoff");
        }
        return region.side_length;
    }
    if (!(region.min_clusters > 0.0)) {
        throw DomainError("min_clusters must be positive when auto-sizing the torus");
    }
    const double by_count = std::sqrt(region.min_clusters / lambda);
    const double by_reach = 20.0 * std::pow(ch.theta, 1.0 / ch.alpha) * ch.r;
    return std::max({by_count, by_reach, min_side});
}

Vec2 NetworkState::node_position(std::size_t node, double r) const
{
    const auto& c = clusters[cluster_of(node)];
    if ((node & 1U) == 0) {
        return c.center;
    }
    return {wrap(c.center.x + r * std::cos(c.angle), side_length),
            wrap(c.center.y + r * std::sin(c.angle), side_length)};
}

double torus_distance_sq(Vec2 a, Vec2 b, double side)
{
    double dx = std::abs(a.x - b.x);
    double dy = std::abs(a.y - b.y);
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
    return dx * dx + dy * dy;
}

NetworkState sample_topology(double lambda, double side_length, std::uint64_t seed,
                             std::uint64_t replication)
{
    if (!(lambda >= 0.0) || !(side_length > 0.0)) {
        throw DomainError("sample_topology needs lambda >= 0 and a positive side length");
    }
    CounterRng rng(StreamKey{seed, replication, 0, StreamTag::topology, 0});
    std::size_t count = 0;
    const double mean = lambda * side_length * side_length;
    if (mean > 0.0) {
        std::poisson_distribution<std::size_t> poisson(mean);
        count = poisson(rng);
    }
    std::vector<ClusterGeometry> clusters(count);
    for (auto& c : clusters) {
        c.center = {rng.uniform() * side_length, rng.uniform() * side_length};
        c.angle = rng.uniform() * two_pi;
    }
    return make_state(side_length, std::move(clusters), seed, replication);
}

NetworkState make_state(double side_length, std::vector<ClusterGeometry> clusters,
                        std::uint64_t seed, std::uint64_t replication)
{
    NetworkState state;
    state.side_length = side_length;
    state.clusters = std::move(clusters);
    state.queues.resize(2 * state.clusters.size());
    state.seed = seed;
    state.replication = replication;
    return state;
}

SlotReport advance_slot(NetworkState& state, const SystemParams& params, const SimOptions& opt)
{
    SlotRunner runner(params, opt, state.side_length);
    SlotReport report;
    runner.step(state, report);
    return report;
}

FadingFn stream_fading(std::uint64_t seed, std::uint64_t replication, std::int64_t slot)
{
    auto stream = std::make_shared<StreamFading>(seed, replication, slot);
    return [stream](std::size_t receiver, std::size_t transmitter) {
        return (*stream)(receiver, transmitter);
    };
}

std::vector<Reception> evaluate_receptions(const NetworkState& state,
                                           const std::vector<bool>& transmitting,
                                           const SystemParams& params, const SimOptions& opt,
                                           const FadingFn& fading)
{
    const std::size_t n = state.node_count();
    if (transmitting.size() != n) {
        throw DomainError("transmitting flags must cover every node");
    }
    std::vector<double> px(n);
    std::vector<double> py(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 p = state.node_position(k, params.ch.r);
        px[k] = p.x;
        py[k] = p.y;
    }
    std::vector<std::uint8_t> is_tx(n, 0);
    std::vector<std::uint32_t> tx_nodes;
    for (std::size_t k = 0; k < n; ++k) {
        if (transmitting[k]) {
            is_tx[k] = 1;
            tx_nodes.push_back(static_cast<std::uint32_t>(k));
        }
    }
    ReceptionEngine engine(params, opt, state.side_length);
    auto call = [&fading](std::size_t m, std::size_t j) { return fading(m, j); };
    std::vector<Reception> out;
    engine.resolve(px, py, tx_nodes, is_tx, call, out);
    return out;
}

ReplicationSummary run_replication(const SystemParams& params, const RegionConfig& region,
                                   const SimOptions& opt, std::uint64_t seed,
                                   std::uint64_t replication)
{
    params.validate();
    opt.validate();
    const double side = resolve_side_length(region, params.lambda, params.ch, opt);
    NetworkState state = sample_topology(params.lambda, side, seed, replication);
    preload(state, opt.initial_backlog);

    SlotRunner runner(params, opt, side);
    SlotReport report;

    std::uint64_t attempts = 0;
    std::uint64_t successes = 0;
    std::uint64_t fd_links = 0;
    std::uint64_t hd_links = 0;
    std::uint64_t nonempty = 0;
    std::uint64_t node_slots = 0;
    std::uint64_t queued = 0;
    double delay_sum = 0.0;
    std::uint64_t completed = 0;

    for (std::int64_t t = 0; t < opt.horizon; ++t) {
        runner.step(state, report);
        if (t < opt.warmup) {
            continue;
        }
        attempts += report.attempts;
        successes += report.successes;
        fd_links += report.fd_links;
        hd_links += report.hd_links;
        nonempty += report.nonempty_nodes;
        node_slots += report.nodes;
        queued += report.queued_packets;
        for (const auto d : report.completed_delays) {
            delay_sum += static_cast<double>(d);
        }
        completed += report.completed_delays.size();
    }

    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    ReplicationSummary s;
    s.replication = replication;
    s.clusters = state.clusters.size();
    s.side_length = side;
    s.measured_slots = opt.horizon - opt.warmup;
    s.attempts = attempts;
    s.successes = successes;
    s.degenerate = attempts == 0;
    s.ps_hat = attempts ? static_cast<double>(successes) / static_cast<double>(attempts) : nan;
    s.nonempty_fraction =
        node_slots ? static_cast<double>(nonempty) / static_cast<double>(node_slots) : 0.0;
    s.mean_delay = completed ? delay_sum / static_cast<double>(completed) : nan;
    s.completed_packets = completed;
    const double slots = static_cast<double>(s.measured_slots);
    s.throughput_density = static_cast<double>(successes) / (slots * side * side);
    const double cluster_slots = static_cast<double>(s.clusters) * slots;
    if (cluster_slots > 0.0) {
        const double p2 = static_cast<double>(fd_links) / cluster_slots;
        const double p1 = static_cast<double>(hd_links) / cluster_slots;
        s.mode_freqs = {1.0 - p1 - p2, p1, p2};
    }
    s.mean_queue = node_slots ? static_cast<double>(queued) / static_cast<double>(node_slots) : 0.0;
    return s;
}

std::vector<ReplicationSummary> run_replications(const SystemParams& params,
                                                 const RegionConfig& region, const SimOptions& opt,
                                                 std::uint64_t seed, std::size_t n_runs,
                                                 unsigned jobs)
{
    std::vector<ReplicationSummary> out(n_runs);
    parallel_for(n_runs, jobs, [&](std::size_t i) {
        out[i] = run_replication(params, region, opt, seed, static_cast<std::uint64_t>(i));
    });
    return out;
}

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::stable:
        return "stable";
    case Verdict::unstable:
        return "unstable";
    case Verdict::inconclusive:
        return "inconclusive";
    }
    return "inconclusive";
}

void ProbeConfig::validate() const
{
    if (n_seeds < 5) {
        throw DomainError("stability probe needs at least 5 seeds");
    }
    if (horizon < 4) {
        throw DomainError("stability probe horizon too short");
    }
    if (!(drift_tolerance >= 0.0)) {
        throw DomainError("drift tolerance must be non-negative");
    }
}

double trend_slope(std::span<const double> series)
{
    const std::size_t n = series.size();
    if (n < 2) {
        return 0.0;
    }
    const double t_mean = 0.5 * static_cast<double>(n - 1);
    double y_mean = 0.0;
    for (const double y : series) {
        y_mean += y;
    }
    y_mean /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = static_cast<double>(i) - t_mean;
        sxy += dt * (series[i] - y_mean);
        sxx += dt * dt;
    }
    return sxy / sxx;
}

StabilityVerdict probe_stability(const SystemParams& params, const RegionConfig& region,
                                 const SimOptions& base, const ProbeConfig& probe)
{
    params.validate();
    probe.validate();
    SimOptions opt = base;
    opt.horizon = probe.horizon;
    opt.warmup = 0;
    opt.saturated = false;
    opt.initial_backlog = probe.initial_backlog;
    const double side = resolve_side_length(region, params.lambda, params.ch, opt);
    const std::int64_t half = probe.horizon / 2;

    std::vector<double> slopes(probe.n_seeds);
    std::vector<double> means(probe.n_seeds);
    parallel_for(probe.n_seeds, probe.jobs, [&](std::size_t i) {
        NetworkState state = sample_topology(params.lambda, side, probe.seed, i);
        preload(state, opt.initial_backlog);
        SlotRunner runner(params, opt, side);
        SlotReport report;
        std::vector<double> series;
        series.reserve(static_cast<std::size_t>(probe.horizon - half));
        for (std::int64_t t = 0; t < probe.horizon; ++t) {
            runner.step(state, report);
            if (t >= half) {
                series.push_back(report.nodes ? static_cast<double>(report.queued_packets)
                                                    / static_cast<double>(report.nodes)
                                              : 0.0);
            }
        }
        slopes[i] = trend_slope(series);
        double sum = 0.0;
        for (const double v : series) {
            sum += v;
        }
        means[i] = series.empty() ? 0.0 : sum / static_cast<double>(series.size());
    });

    StabilityVerdict v;
    v.slopes = slopes;
    const Interval slope_ci = mean_ci(slopes);
    v.slope_mean = slope_ci.mean;
    v.slope_lo = slope_ci.lo();
    v.slope_hi = slope_ci.hi();
    v.mean_queue = mean_ci(means).mean;

    const double tol = probe.drift_tolerance;
    if (v.slope_lo > tol) {
        v.verdict = Verdict::unstable;
    } else if (v.slope_hi >= -tol && v.mean_queue <= probe.mean_queue_cap) {
        v.verdict = Verdict::stable;
    } else {
        v.verdict = Verdict::inconclusive;
    }
    return v;
}

} // namespace fdaloha
