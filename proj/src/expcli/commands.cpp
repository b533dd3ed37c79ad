#include "internal.hpp"

#include "fdaloha/rng.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace fdaloha::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Keys that select where output goes or how fast it is produced; they never
// change the numbers and stay out of the header.
const std::set<std::string, std::less<>> unechoed{"jobs", "out", "out-dir"};

std::string num(double v)
{
    return format_number(v);
}

ChannelParams read_channel(Config& cfg)
{
    ChannelParams ch;
    ch.alpha = cfg.number("alpha", 4.0);
    ch.r = cfg.number("r", 1.0);
    ch.theta = cfg.number("theta", 2.0);
    return ch;
}

// Runs fn with solver-level failures mapped onto CLI error classes.
template <class Fn>
auto guarded(Fn&& fn)
{
    try {
        return fn();
    } catch (const ConvergenceError& e) {
        throw RunFailure(e.what());
    } catch (const InstabilityError& e) {
        throw RunFailure(e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

std::vector<ReplicationSummary> replicate(const ExperimentConfig& e, const SystemParams& p,
                                          std::uint64_t seed)
{
    try {
        return run_replications(p, e.region, e.sim, seed, e.n_runs, e.jobs);
    } catch (const std::exception& ex) {
        throw RunFailure(std::string("replication failed: ") + ex.what());
    }
}

} // namespace

void attach_config(CsvTable& table, const Config& cfg)
{
    table.meta.clear();
    for (const auto& [k, v] : cfg.resolved()) {
        if (unechoed.find(k) == unechoed.end()) {
            table.meta.emplace_back(k, v);
        }
    }
}

std::uint64_t point_seed(std::uint64_t master, std::size_t point)
{
    return mix64(master ^ mix64(0x5eedULL + point));
}

// Analytical metrics for a stable operating point, or nullopt.
std::optional<AnalyticalMetrics> analytic_point(const SystemParams& p, const SpatialConstants& sc)
{
    if (p.duplex == Duplex::hd) {
        const auto fp = hd_success_fixed_point(p.a, p.lambda, sc.omega1);
        if (!fp.ok() || !(p.q * fp.ps > 2.0 * p.a)) {
            return std::nullopt;
        }
        return hd_queue_metrics(p.a, p.q, fp.ps);
    }
    const auto scaling =
        p.ic_model == IcModel::bound && p.eta > 0.0 ? IcScaling::beta_scaled : IcScaling::ideal;
    const auto fp = fd_success_fixed_point(p.a, p.lambda, sc, scaling);
    if (!fp.ok() || !(p.q * fp.ps > p.a)) {
        return std::nullopt;
    }
    return fd_queue_metrics(p.a, p.q, fp.ps);
}

CsvTable cmd_omega(Config& cfg)
{
    CsvTable t;
    t.command = "omega";
    const ChannelParams ch = read_channel(cfg);
    const double eta = cfg.number("eta", 0.0);
    QuadratureConfig quad;
    quad.rel_tol = cfg.number("rel-tol", quad.rel_tol);
    quad.inner_nodes = static_cast<int>(cfg.integer("inner-nodes", quad.inner_nodes));
    guarded([&] {
        ch.validate();
        quad.validate();
        const double o1 = omega1(ch);
        const auto o2 = omega2_detailed(ch, quad);
        const double beta = ic_scale_beta(eta, ch);
        t.columns = {"alpha", "r", "theta", "eta", "omega1", "omega2", "beta", "omega2_err",
                     "omega2_l1"};
        t.add_row({num(ch.alpha), num(ch.r), num(ch.theta), num(eta), num(o1), num(o2.value),
                   num(beta), num(o2.error_estimate), num(o2.l1_norm)});
        return 0;
    });
    attach_config(t, cfg);
    return t;
}

CsvTable cmd_fixedpoint(Config& cfg)
{
    CsvTable t;
    t.command = "fixedpoint";
    const ChannelParams ch = read_channel(cfg);
    const std::string mode = cfg.text("mode", "fd");
    if (mode != "fd" && mode != "hd" && mode != "fd_ic") {
        throw ConfigError("mode must be fd, hd or fd_ic");
    }
    const double lambda = cfg.number("lambda", 0.2);
    const double a = cfg.number("a", 0.13);
    const double eta = cfg.number("eta", mode == "fd_ic" ? 0.05 : 0.0);

    guarded([&] {
        ch.validate();
        const SpatialConstants sc = resolve_spatial(ch, eta);
        const bool hd = mode == "hd";
        const auto scaling = mode == "fd_ic" ? IcScaling::beta_scaled : IcScaling::ideal;
        const StabilityPoint opt =
            hd ? hd_optimal_access(lambda, sc.omega1) : fd_optimal_access(lambda, sc, scaling);
        const double q = cfg.number("q", opt.q_star);
        if (!(q > 0.0 && q <= 1.0)) {
            throw ConfigError("q must lie in (0, 1]");
        }
        const FixedPointResult fp = hd ? hd_success_fixed_point(a, lambda, sc.omega1)
                                       : fd_success_fixed_point(a, lambda, sc, scaling);

        std::string status = "no_solution";
        AnalyticalMetrics m;
        m.ps = fp.ok() ? fp.ps : nan;
        m.pi0 = m.n_mean = m.delay = nan;
        m.mode_probs = {nan, nan, nan};
        m.delay_is_bound = hd;
        if (fp.ok()) {
            const bool stable = hd ? q * fp.ps > 2.0 * a : q * fp.ps > a;
            status = stable ? "stable" : "unstable";
            if (stable) {
                m = hd ? hd_queue_metrics(a, q, fp.ps) : fd_queue_metrics(a, q, fp.ps);
            }
        }
        t.columns = {"mode", "lambda", "a", "q", "status", "ps", "pi0", "n_mean", "delay",
                     "delay_is_bound", "p0", "p1", "p2", "alpha", "r", "theta", "eta"};
        t.add_row({mode, num(lambda), num(a), num(q), status, num(m.ps), num(m.pi0), num(m.n_mean),
                   num(m.delay), m.delay_is_bound ? "1" : "0", num(m.mode_probs.p0),
                   num(m.mode_probs.p1), num(m.mode_probs.p2), num(ch.alpha), num(ch.r),
                   num(ch.theta), num(eta)});
        return 0;
    });
    attach_config(t, cfg);
    return t;
}

CsvTable cmd_boundary(Config& cfg)
{
    CsvTable t;
    t.command = "boundary";
    const ChannelParams ch = read_channel(cfg);
    const std::string mode_name = cfg.text("mode", "fd");
    BoundaryMode mode = BoundaryMode::fd;
    if (mode_name == "hd") {
        mode = BoundaryMode::hd;
    } else if (mode_name == "fd_ic") {
        mode = BoundaryMode::fd_bound_ic;
    } else if (mode_name != "fd") {
        throw ConfigError("mode must be fd, hd or fd_ic");
    }
    const double eta = cfg.number("eta", mode == BoundaryMode::fd_bound_ic ? 0.05 : 0.0);
    const auto grid = cfg.grid("lambda-grid", "0.01:5:log:50");
    guarded([&] {
        const auto rows = sweep_boundary(mode, grid, ch,
                                         [eta](const ChannelParams& c) { return resolve_spatial(c, eta); });
        t.columns = {"mode", "lambda", "q_star", "a_star", "tau_star", "fd_link_frac",
                     "alpha", "r", "theta", "eta"};
        for (const auto& row : rows) {
            t.add_row({mode_name, num(row.lambda), num(row.point.q_star), num(row.point.a_star),
                       num(row.point.tau_star), num(row.fd_link_frac), num(ch.alpha), num(ch.r),
                       num(ch.theta), num(eta)});
        }
        return 0;
    });
    attach_config(t, cfg);
    return t;
}

CsvTable cmd_simulate(Config& cfg)
{
    CsvTable t;
    t.command = "simulate";
    ExperimentConfig e = ExperimentConfig::from(cfg);
    const std::string sweep = cfg.text("sweep", "none");
    std::vector<double> grid;
    if (sweep == "q" || sweep == "a" || sweep == "lambda") {
        grid = cfg.grid("grid", "");
    } else if (sweep != "none") {
        throw ConfigError("sweep must be none, q, a or lambda");
    }
    const SpatialConstants sc =
        guarded([&] { return resolve_spatial(e.params.ch, e.params.effective_eta()); });

    t.columns = {"lambda", "a", "q", "mode", "ic_model", "eta", "saturated", "runs",
                 "degenerate_runs", "ps_sim", "ps_lo", "ps_hi", "ne_sim", "ne_lo", "ne_hi",
                 "delay_sim", "delay_lo", "delay_hi", "tput_sim", "tput_lo", "tput_hi", "p0_sim",
                 "p1_sim", "p2_sim", "ps_ana", "ne_ana", "delay_ana", "horizon", "warmup", "seed"};

    const std::size_t points = grid.empty() ? 1 : grid.size();
    for (std::size_t i = 0; i < points; ++i) {
        SystemParams p = e.params;
        if (sweep == "q") {
            p.q = grid[i];
        } else if (sweep == "a") {
            p.a = grid[i];
        } else if (sweep == "lambda") {
            p.lambda = grid[i];
        }
        guarded([&] {
            p.validate();
            return 0;
        });
        const std::uint64_t seed = grid.empty() ? e.master_seed : point_seed(e.master_seed, i);
        const auto runs = replicate(e, p, seed);
        const auto est = aggregate(runs);
        std::size_t degenerate = 0;
        for (const auto& r : runs) {
            degenerate += r.degenerate ? 1 : 0;
        }

        double ps_ana = nan;
        double ne_ana = nan;
        double delay_ana = nan;
        if (e.sim.saturated) {
            ps_ana = p.duplex == Duplex::hd
                         ? hd_saturated_success_prob(p.q, p.lambda, sc.omega1)
                         : saturated_success_prob(p.q, p.lambda, sc,
                                                  p.ic_model == IcModel::bound ? IcScaling::beta_scaled
                                                                               : IcScaling::ideal);
            ne_ana = 1.0;
        } else if (p.ic_model != IcModel::actual) {
            if (const auto m = analytic_point(p, sc)) {
                ps_ana = m->ps;
                ne_ana = 1.0 - m->pi0;
                delay_ana = m->delay;
            }
        }
        t.add_row({num(p.lambda), num(p.a), num(p.q), std::string(to_string(p.duplex)),
                   std::string(to_string(p.ic_model)), num(p.effective_eta()),
                   e.sim.saturated ? "1" : "0", std::to_string(e.n_runs), std::to_string(degenerate),
                   num(est.ps.mean), num(est.ps.lo()), num(est.ps.hi()), num(est.nonempty.mean),
                   num(est.nonempty.lo()), num(est.nonempty.hi()), num(est.delay.mean),
                   num(est.delay.lo()), num(est.delay.hi()), num(est.tput_density.mean),
                   num(est.tput_density.lo()), num(est.tput_density.hi()),
                   num(est.mode_freqs[0].mean), num(est.mode_freqs[1].mean),
                   num(est.mode_freqs[2].mean), num(ps_ana), num(ne_ana), num(delay_ana),
                   std::to_string(e.sim.horizon), std::to_string(e.sim.warmup),
                   std::to_string(seed)});
    }
    attach_config(t, cfg);
    return t;
}

ProbeOutcome cmd_probe(Config& cfg)
{
    ProbeOutcome out;
    CsvTable& t = out.table;
    t.command = "probe";
    ExperimentConfig e = ExperimentConfig::from(cfg);
    SystemParams& p = e.params;
    const SpatialConstants sc = guarded([&] { return resolve_spatial(p.ch, p.effective_eta()); });

    const bool hd = p.duplex == Duplex::hd;
    const auto scaling = p.ic_model == IcModel::bound ? IcScaling::beta_scaled : IcScaling::ideal;
    const double bound = guarded([&] {
        return hd ? hd_stability_bound(p.q, p.lambda, sc.omega1)
                  : fd_stability_bound(p.q, p.lambda, sc, scaling);
    });
    double mult = nan;
    if (cfg.has("a-mult")) {
        mult = cfg.number("a-mult", 1.0);
        p.a = mult * bound;
        cfg.set("a", format_number(p.a));
        cfg.number("a", p.a);
    }
    ProbeConfig probe;
    probe.horizon = cfg.integer("horizon", probe.horizon);
    probe.n_seeds = static_cast<std::size_t>(cfg.integer("seeds", static_cast<std::int64_t>(probe.n_seeds)));
    probe.seed = e.master_seed;
    probe.initial_backlog = static_cast<std::uint32_t>(cfg.integer("backlog", probe.initial_backlog));
    probe.drift_tolerance = cfg.number("drift-tol", probe.drift_tolerance);
    probe.mean_queue_cap = cfg.number("queue-cap", probe.mean_queue_cap);
    probe.jobs = e.jobs;

    const StabilityVerdict v = [&] {
        try {
            p.validate();
            probe.validate();
        } catch (const DomainError& ex) {
            throw ConfigError(ex.what());
        }
        try {
            return probe_stability(p, e.region, e.sim, probe);
        } catch (const std::exception& ex) {
            throw RunFailure(std::string("probe failed: ") + ex.what());
        }
    }();
    out.verdict = v.verdict;

    t.columns = {"mode", "lambda", "q", "a", "bound", "a_mult", "verdict", "slope_mean", "slope_lo",
                 "slope_hi", "mean_queue", "seeds", "horizon", "backlog", "seed"};
    t.add_row({std::string(to_string(p.duplex)), num(p.lambda), num(p.q), num(p.a), num(bound),
               num(mult), std::string(to_string(v.verdict)), num(v.slope_mean), num(v.slope_lo),
               num(v.slope_hi), num(v.mean_queue), std::to_string(probe.n_seeds),
               std::to_string(probe.horizon), std::to_string(probe.initial_backlog),
               std::to_string(probe.seed)});
    attach_config(t, cfg);
    return out;
}

} // namespace fdaloha::cli
