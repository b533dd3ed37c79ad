#pragma once

// Command-line front end: flat key=value configs, CSV artifacts and the
// omega / fixedpoint / boundary / simulate / probe / figure commands.

#include "fdaloha/estimators.hpp"
#include "fdaloha/netsim.hpp"
#include "fdaloha/stability.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fdaloha::cli {

enum class ExitCode : int {
    ok = 0,
    invalid_config = 2,
    runtime_failure = 3,
    inconclusive = 4,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failure inside a simulation or solver run (exit code 3).
class RunFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string, std::less<>>;

// `key = value` lines; `#` starts a comment; blank lines are ignored.
KeyValues parse_config_text(std::string_view text);
KeyValues load_config_file(const std::string& path);

// Grid syntax:
//   v1,v2,...        explicit values
//   lo:hi:n          n evenly spaced values including both ends
//   lo:hi:log[:n]    n log-spaced values (default 50)
// The result must be strictly increasing.
std::vector<double> parse_grid(std::string_view desc);

// Resolved settings with typed accessors. Every key read through an
// accessor is recorded with its effective value for the CSV header.
class Config {
public:
    Config() = default;
    explicit Config(KeyValues values) : values_(std::move(values)) {}

    // Later layers win.
    void overlay(const KeyValues& layer);
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    [[nodiscard]] bool has(std::string_view key) const { return values_.find(key) != values_.end(); }

    double number(const std::string& key, double fallback);
    std::int64_t integer(const std::string& key, std::int64_t fallback);
    std::string text(const std::string& key, const std::string& fallback);
    bool flag(const std::string& key, bool fallback);
    std::vector<double> grid(const std::string& key, const std::string& fallback);

    // Keys never read by the command, which indicates a typo.
    [[nodiscard]] std::vector<std::string> unused_keys() const;
    [[nodiscard]] const KeyValues& resolved() const { return resolved_; }

private:
    std::optional<std::string> raw(const std::string& key) const;
    void record(const std::string& key, const std::string& value);

    KeyValues values_;
    KeyValues resolved_;
};

// printf %.12g with nan / inf spelled out.
std::string format_number(double v);

struct CsvTable {
    std::string command;
    std::vector<std::pair<std::string, std::string>> meta;  // `# key=value` lines
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    [[nodiscard]] std::string str() const;
    [[nodiscard]] std::size_t column(std::string_view name) const;  // index or throws
};

// Column-wise access to a written CSV, skipping `#` lines.
struct CsvData {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::vector<double> numbers(std::string_view column) const;
};

CsvData parse_csv(std::string_view text);

// Shared experiment settings assembled from a Config.
struct ExperimentConfig {
    SystemParams params;
    RegionConfig region;
    SimOptions sim;
    std::size_t n_runs = 40;
    std::uint64_t master_seed = 1;
    unsigned jobs = 1;

    static ExperimentConfig from(Config& cfg);
};

// Memoised spatial constants keyed by (alpha, r, theta, eta).
SpatialConstants resolve_spatial(const ChannelParams& ch, double eta);

CsvTable cmd_omega(Config& cfg);
CsvTable cmd_fixedpoint(Config& cfg);
CsvTable cmd_boundary(Config& cfg);
CsvTable cmd_simulate(Config& cfg);

struct ProbeOutcome {
    CsvTable table;
    Verdict verdict = Verdict::inconclusive;
};

ProbeOutcome cmd_probe(Config& cfg);

CsvTable cmd_figure(int figure, Config& cfg);

// Full front end: argv without the program name. Results go to `out` or to
// the configured files; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace fdaloha::cli
