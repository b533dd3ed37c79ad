#include "fdaloha/expcli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <tuple>

namespace fdaloha::cli {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view s, std::string_view what)
{
    s = trim(s);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
        throw ConfigError("invalid number '" + std::string(s) + "' for " + std::string(what));
    }
    return v;
}

std::int64_t to_integer(std::string_view s, std::string_view what)
{
    s = trim(s);
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != end) {
        throw ConfigError("invalid integer '" + std::string(s) + "' for " + std::string(what));
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return parts;
}

} // namespace

KeyValues parse_config_text(std::string_view text)
{
    KeyValues out;
    std::size_t line_no = 0;
    for (const auto raw_line : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw_line;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        out[std::string(key)] = std::string(value);
    }
    return out;
}

KeyValues load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::vector<double> parse_grid(std::string_view desc)
{
    desc = trim(desc);
    if (desc.empty()) {
        throw ConfigError("empty grid");
    }
    std::vector<double> grid;
    if (desc.find(':') != std::string_view::npos) {
        const auto parts = split(desc, ':');
        if (parts.size() < 3 || parts.size() > 4) {
            throw ConfigError("grid '" + std::string(desc) + "': expected lo:hi:n or lo:hi:log[:n]");
        }
        const double lo = to_double(parts[0], "grid start");
        const double hi = to_double(parts[1], "grid end");
        const bool log = trim(parts[2]) == "log";
        if (!log && parts.size() != 3) {
            throw ConfigError("grid '" + std::string(desc) + "': expected lo:hi:n");
        }
        const std::int64_t n =
            log ? (parts.size() == 4 ? to_integer(parts[3], "grid size") : 50)
                : to_integer(parts[2], "grid size");
        if (n < 1 || n > 100000) {
            throw ConfigError("grid size must lie in [1, 100000]");
        }
        if (log && !(lo > 0.0 && hi > 0.0)) {
            throw ConfigError("log grid needs positive ends");
        }
        if (n == 1) {
            if (lo != hi) {
                throw ConfigError("a one-point grid needs lo == hi");
            }
            grid.push_back(lo);
        } else {
            for (std::int64_t i = 0; i < n; ++i) {
                const double f = static_cast<double>(i) / static_cast<double>(n - 1);
                double v = log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                               : lo + f * (hi - lo);
                if (i == 0) {
                    v = lo;
                } else if (i == n - 1) {
                    v = hi;
                }
                grid.push_back(v);
            }
        }
    } else {
        for (const auto part : split(desc, ',')) {
            grid.push_back(to_double(part, "grid value"));
        }
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw ConfigError("grid '" + std::string(desc) + "' is not strictly increasing");
        }
    }
    return grid;
}

void Config::overlay(const KeyValues& layer)
{
    for (const auto& [k, v] : layer) {
        values_[k] = v;
    }
}

std::optional<std::string> Config::raw(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void Config::record(const std::string& key, const std::string& value)
{
    resolved_[key] = value;
}

double Config::number(const std::string& key, double fallback)
{
    const auto v = raw(key);
    const double out = v ? to_double(*v, key) : fallback;
    record(key, format_number(out));
    return out;
}

std::int64_t Config::integer(const std::string& key, std::int64_t fallback)
{
    const auto v = raw(key);
    const std::int64_t out = v ? to_integer(*v, key) : fallback;
    record(key, std::to_string(out));
    return out;
}

std::string Config::text(const std::string& key, const std::string& fallback)
{
    const auto v = raw(key);
    std::string out = v ? *v : fallback;
    record(key, out);
    return out;
}

bool Config::flag(const std::string& key, bool fallback)
{
    const auto v = raw(key);
    bool out = fallback;
    if (v) {
        if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") {
            out = true;
        } else if (*v == "0" || *v == "false" || *v == "no" || *v == "off") {
            out = false;
        } else {
            throw ConfigError("invalid boolean '" + *v + "' for " + key);
        }
    }
    record(key, out ? "true" : "false");
    return out;
}

std::vector<double> Config::grid(const std::string& key, const std::string& fallback)
{
    const auto v = raw(key);
    const std::string desc = v ? *v : fallback;
    record(key, desc);
    return parse_grid(desc);
}

std::vector<std::string> Config::unused_keys() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (resolved_.find(k) == resolved_.end()) {
            out.push_back(k);
        }
    }
    return out;
}

ExperimentConfig ExperimentConfig::from(Config& cfg)
{
    ExperimentConfig e;
    auto& p = e.params;
    p.ch.alpha = cfg.number("alpha", 4.0);
    p.ch.r = cfg.number("r", 1.0);
    p.ch.theta = cfg.number("theta", 2.0);
    p.lambda = cfg.number("lambda", p.lambda);
    p.a = cfg.number("a", p.a);
    p.q = cfg.number("q", p.q);

    const std::string mode = cfg.text("mode", "fd");
    std::string ic_default = "perfect";
    if (mode == "fd") {
        p.duplex = Duplex::fd;
    } else if (mode == "hd") {
        p.duplex = Duplex::hd;
    } else if (mode == "fd_ic") {
        p.duplex = Duplex::fd;
        ic_default = "bound";
    } else {
        throw ConfigError("mode must be fd, hd or fd_ic");
    }
    const std::string ic = cfg.text("ic-model", ic_default);
    if (ic == "perfect") {
        p.ic_model = IcModel::perfect;
    } else if (ic == "bound") {
        p.ic_model = IcModel::bound;
    } else if (ic == "actual") {
        p.ic_model = IcModel::actual;
    } else {
        throw ConfigError("ic-model must be perfect, bound or actual");
    }
    p.eta = cfg.number("eta", p.ic_model == IcModel::perfect ? 0.0 : 0.05);

    e.region.side_length = cfg.number("side-length", 0.0);
    e.region.min_clusters = cfg.number("min-clusters", e.region.min_clusters);

    const std::int64_t horizon = cfg.integer("horizon", 20000);
    e.sim.horizon = horizon;
    e.sim.warmup = cfg.integer("warmup", horizon / 4);
    e.sim.saturated = cfg.flag("saturated", false);
    const std::int64_t backlog = cfg.integer("backlog", 0);
    if (backlog < 0 || backlog > 1000000) {
        throw ConfigError("backlog must lie in [0, 1e6]");
    }
    e.sim.initial_backlog = static_cast<std::uint32_t>(backlog);
    const std::string interference = cfg.text("interference", "near_field");
    if (interference == "near_field") {
        e.sim.interference = InterferenceModel::near_field;
    } else if (interference == "exact") {
        e.sim.interference = InterferenceModel::exact;
    } else {
        throw ConfigError("interference must be near_field or exact");
    }
    e.sim.cutoff_factor = cfg.number("cutoff-factor", e.sim.cutoff_factor);

    const std::int64_t runs = cfg.integer("runs", 40);
    if (runs < 2) {
        throw ConfigError("runs must be at least 2");
    }
    e.n_runs = static_cast<std::size_t>(runs);
    const std::int64_t seed = cfg.integer("seed", 1);
    if (seed < 0) {
        throw ConfigError("seed must be non-negative");
    }
    e.master_seed = static_cast<std::uint64_t>(seed);
    const std::int64_t jobs = cfg.integer("jobs", 1);
    if (jobs < 1 || jobs > 1024) {
        throw ConfigError("jobs must lie in [1, 1024]");
    }
    e.jobs = static_cast<unsigned>(jobs);

    try {
        p.validate();
        e.sim.validate();
    } catch (const DomainError& ex) {
        throw ConfigError(ex.what());
    }
    return e;
}

SpatialConstants resolve_spatial(const ChannelParams& ch, double eta)
{
    static std::mutex mutex;
    static std::map<std::tuple<double, double, double, double>, SpatialConstants> cache;
    const auto key = std::make_tuple(ch.alpha, ch.r, ch.theta, eta);
    const std::lock_guard lock(mutex);
    if (const auto it = cache.find(key); it != cache.end()) {
        return it->second;
    }
    const SpatialConstants sc = spatial_constants(ch, eta);
    cache.emplace(key, sc);
    return sc;
}

} // namespace fdaloha::cli
