#include "internal.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace fdaloha::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string num(double v)
{
    return format_number(v);
}

// Preset values sit below every user layer.
void preset(Config& cfg, std::initializer_list<std::pair<const char*, const char*>> values)
{
    for (const auto& [k, v] : values) {
        if (!cfg.has(k)) {
            cfg.set(k, v);
        }
    }
}

ChannelParams read_channel(Config& cfg)
{
    ChannelParams ch;
    ch.alpha = cfg.number("alpha", 4.0);
    ch.r = cfg.number("r", 1.0);
    ch.theta = cfg.number("theta", 2.0);
    try {
        ch.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return ch;
}

SpatialConstants spatial_or_fail(const ChannelParams& ch, double eta)
{
    try {
        return resolve_spatial(ch, eta);
    } catch (const ConvergenceError& e) {
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

CsvTable figure_1(Config& cfg)
{
    preset(cfg, {{"lambda", "0.2"}, {"a", "0.13"}, {"q-grid", "0.3:0.65:8"}});
    ExperimentConfig e = ExperimentConfig::from(cfg);
    const auto grid = cfg.grid("q-grid", "0.3:0.65:8");
    const bool simulate = cfg.flag("sim", true);
    const SpatialConstants sc = spatial_or_fail(e.params.ch, e.params.effective_eta());

    CsvTable t;
    t.command = "figure 1";
    t.columns = {"q", "ps_ana", "ne_ana", "ps_sim", "ps_lo", "ps_hi", "ne_sim", "ne_lo", "ne_hi",
                 "lambda", "a", "alpha", "r", "theta", "runs", "horizon", "seed"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SystemParams p = e.params;
        p.q = grid[i];
        try {
            p.validate();
        } catch (const DomainError& ex) {
            throw ConfigError(ex.what());
        }
        double ps_ana = nan;
        double ne_ana = nan;
        if (const auto m = analytic_point(p, sc)) {
            ps_ana = m->ps;
            ne_ana = 1.0 - m->pi0;
        }
        Interval ps{nan, nan, 0};
        Interval ne{nan, nan, 0};
        const std::uint64_t seed = point_seed(e.master_seed, i);
        if (simulate) {
            const auto est = aggregate(replicate(e, p, seed));
            ps = est.ps;
            ne = est.nonempty;
        }
        t.add_row({num(p.q), num(ps_ana), num(ne_ana), num(ps.mean), num(ps.lo()), num(ps.hi()),
                   num(ne.mean), num(ne.lo()), num(ne.hi()), num(p.lambda), num(p.a),
                   num(p.ch.alpha), num(p.ch.r), num(p.ch.theta), std::to_string(e.n_runs),
                   std::to_string(e.sim.horizon), std::to_string(seed)});
    }
    return t;
}

CsvTable figure_2(Config& cfg)
{
    const ChannelParams ch = read_channel(cfg);
    const double eta = cfg.number("eta", 0.05);
    const auto grid = cfg.grid("lambda-grid", "0.01:5:log:60");
    const SpatialConstants sc = spatial_or_fail(ch, eta);
    const SpatialResolver resolver = [&sc](const ChannelParams&) { return sc; };
    const auto hd = sweep_boundary(BoundaryMode::hd, grid, ch, resolver);
    const auto fd = sweep_boundary(BoundaryMode::fd, grid, ch, resolver);
    const auto fd_ic = sweep_boundary(BoundaryMode::fd_bound_ic, grid, ch, resolver);

    CsvTable t;
    t.command = "figure 2";
    t.columns = {"lambda", "astar_hd", "astar_fd", "astar_fd_ic", "fd_link_frac", "qstar_hd",
                 "qstar_fd", "eta", "alpha", "r", "theta"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.add_row({num(grid[i]), num(hd[i].point.a_star), num(fd[i].point.a_star),
                   num(fd_ic[i].point.a_star), num(fd[i].fd_link_frac), num(hd[i].point.q_star),
                   num(fd[i].point.q_star), num(eta), num(ch.alpha), num(ch.r), num(ch.theta)});
    }
    return t;
}

CsvTable figure_3(Config& cfg)
{
    preset(cfg, {{"lambda", "0.15"}});
    ExperimentConfig e = ExperimentConfig::from(cfg);
    const auto grid = cfg.grid("a-grid", "0.02:0.18:9");
    const bool simulate = cfg.flag("sim", true);
    const SpatialConstants sc = spatial_or_fail(e.params.ch, 0.0);
    const double lambda = e.params.lambda;
    const double q_fd = cfg.number("q-fd", fd_optimal_access(lambda, sc).q_star);
    const double q_hd = cfg.number("q-hd", hd_optimal_access(lambda, sc.omega1).q_star);

    CsvTable t;
    t.command = "figure 3";
    t.columns = {"a", "d_fd_ana", "d_fd_sim", "d_fd_lo", "d_fd_hi", "d_hd_bound", "d_hd_sim",
                 "d_hd_lo", "d_hd_hi", "lambda", "q_fd", "q_hd", "alpha", "r", "theta", "runs",
                 "horizon", "seed"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SystemParams fd = e.params;
        fd.duplex = Duplex::fd;
        fd.ic_model = IcModel::perfect;
        fd.eta = 0.0;
        fd.a = grid[i];
        fd.q = q_fd;
        SystemParams hd = fd;
        hd.duplex = Duplex::hd;
        hd.q = q_hd;
        try {
            fd.validate();
            hd.validate();
        } catch (const DomainError& ex) {
            throw ConfigError(ex.what());
        }

        std::array<double, 4> fd_cols{nan, nan, nan, nan};
        std::array<double, 4> hd_cols{nan, nan, nan, nan};
        auto fill = [&](const SystemParams& p, std::size_t stream, std::array<double, 4>& cols) {
            const auto m = analytic_point(p, sc);
            if (!m) {
                return;
            }
            cols[0] = m->delay;
            if (simulate) {
                const auto est = aggregate(replicate(e, p, point_seed(e.master_seed, stream)));
                cols[1] = est.delay.mean;
                cols[2] = est.delay.lo();
                cols[3] = est.delay.hi();
            }
        };
        fill(fd, 2 * i, fd_cols);
        fill(hd, 2 * i + 1, hd_cols);
        t.add_row({num(grid[i]), num(fd_cols[0]), num(fd_cols[1]), num(fd_cols[2]),
                   num(fd_cols[3]), num(hd_cols[0]), num(hd_cols[1]), num(hd_cols[2]),
                   num(hd_cols[3]), num(lambda), num(q_fd), num(q_hd), num(fd.ch.alpha),
                   num(fd.ch.r), num(fd.ch.theta), std::to_string(e.n_runs),
                   std::to_string(e.sim.horizon), std::to_string(e.master_seed)});
    }
    return t;
}

CsvTable figure_4(Config& cfg)
{
    const ChannelParams ch = read_channel(cfg);
    const double eta = cfg.number("eta", 0.05);
    const auto grid = cfg.grid("lambda-grid", "0.01:5:log:60");
    const SpatialConstants sc = spatial_or_fail(ch, eta);

    CsvTable t;
    t.command = "figure 4";
    t.columns = {"lambda", "tput_hd", "tput_fd", "tput_fd_ic", "eta", "beta", "alpha", "r", "theta"};
    for (const double lambda : grid) {
        if (!(lambda > 0.0)) {
            throw ConfigError("lambda grid values must be positive");
        }
        const auto hd = hd_optimal_access(lambda, sc.omega1);
        const auto fd = fd_optimal_access(lambda, sc);
        const auto fd_ic = fd_optimal_access(lambda, sc, IcScaling::beta_scaled);
        t.add_row({num(lambda), num(hd.tau_star), num(fd.tau_star), num(fd_ic.tau_star), num(eta),
                   num(sc.beta), num(ch.alpha), num(ch.r), num(ch.theta)});
    }
    return t;
}

} // namespace

CsvTable cmd_figure(int figure, Config& cfg)
{
    CsvTable t;
    switch (figure) {
    case 1:
        t = figure_1(cfg);
        break;
    case 2:
        t = figure_2(cfg);
        break;
    case 3:
        t = figure_3(cfg);
        break;
    case 4:
        t = figure_4(cfg);
        break;
    default:
        throw ConfigError("figure number must be 1, 2, 3 or 4");
    }
    attach_config(t, cfg);
    return t;
}

} // namespace fdaloha::cli
