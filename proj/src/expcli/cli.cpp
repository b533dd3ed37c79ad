#include "fdaloha/expcli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

namespace fdaloha::cli {

namespace {

using KeyList = std::vector<std::string>;

const KeyList channel_keys{"alpha", "r", "theta", "eta"};

const KeyList experiment_keys{"alpha",      "r",       "theta",        "eta",           "lambda",
                              "a",          "q",       "mode",         "ic-model",      "side-length",
                              "min-clusters", "horizon", "warmup",     "saturated",     "backlog",
                              "interference", "cutoff-factor", "runs", "seed",          "jobs"};

KeyList join(KeyList base, std::initializer_list<const char*> extra)
{
    for (const char* k : extra) {
        base.emplace_back(k);
    }
    return base;
}

struct Command {
    std::string name;
    std::string help;
    KeyList keys;
};

const std::vector<Command>& commands()
{
    static const std::vector<Command> list{
        {"omega", "Spatial constants omega1, omega2 and beta",
         join(channel_keys, {"rel-tol", "inner-nodes"})},
        {"fixedpoint", "Success-probability fixed point and queue metrics",
         join(channel_keys, {"mode", "lambda", "a", "q"})},
        {"boundary", "Maximum stable arrival rate over a lambda grid",
         join(channel_keys, {"mode", "lambda-grid"})},
        {"simulate", "Replicated network simulation at one point or along a sweep",
         join(experiment_keys, {"sweep", "grid"})},
        {"probe", "Empirical stability verdict from queue drift",
         join(experiment_keys, {"a-mult", "seeds", "drift-tol", "queue-cap"})},
        {"figure", "Figure presets 1-4",
         join(experiment_keys, {"sim", "q-grid", "a-grid", "lambda-grid", "q-fd", "q-hd"})},
    };
    return list;
}

void write_output(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        throw RunFailure("cannot write " + path);
    }
    f << text;
    if (!f) {
        throw RunFailure("write failed for " + path);
    }
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Full-duplex ALOHA network analysis and simulation"};
    app.require_subcommand(1);

    // std::map keeps option storage addresses stable.
    std::map<std::string, std::map<std::string, std::string>> flag_values;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, std::string> out_paths;
    std::string out_dir;
    int figure_number = 0;

    for (const auto& cmd : commands()) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        auto& values = flag_values[cmd.name];
        for (const auto& key : cmd.keys) {
            sub->add_option("--" + key, values[key]);
        }
        sub->add_option("--config", config_paths[cmd.name], "key=value settings file");
        sub->add_option("--out", out_paths[cmd.name], "CSV output path; - for stdout");
        if (cmd.name == "figure") {
            sub->add_option("n", figure_number, "figure number")->required();
            sub->add_option("--out-dir", out_dir, "directory for figN.csv");
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (app.get_subcommands().empty() ? app.help()
                                                  : app.get_subcommands().front()->help());
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::invalid_config);
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    const auto& command = *std::find_if(commands().begin(), commands().end(),
                                     [&](const Command& c) { return c.name == name; });

    try {
        Config cfg;
        const std::string& config_path = config_paths[name];
        if (!config_path.empty()) {
            const KeyValues file = load_config_file(config_path);
            const std::set<std::string, std::less<>> allowed(command.keys.begin(), command.keys.end());
            for (const auto& [k, v] : file) {
                if (allowed.find(k) == allowed.end()) {
                    throw ConfigError("unknown key '" + k + "' in " + config_path + " for " + name);
                }
            }
            cfg.overlay(file);
        }
        if (const char* env = std::getenv("FDALOHA_SEED"); env != nullptr && *env != '\0') {
            if (std::find(command.keys.begin(), command.keys.end(), "seed") != command.keys.end()) {
                cfg.set("seed", env);
            }
        }
        KeyValues flags;
        for (const auto& key : command.keys) {
            if (chosen->count("--" + key) > 0) {
                flags[key] = flag_values[name][key];
            }
        }
        cfg.overlay(flags);

        std::string path = out_paths[name];
        int code = static_cast<int>(ExitCode::ok);
        CsvTable table;
        if (name == "omega") {
            table = cmd_omega(cfg);
        } else if (name == "fixedpoint") {
            table = cmd_fixedpoint(cfg);
        } else if (name == "boundary") {
            table = cmd_boundary(cfg);
        } else if (name == "simulate") {
            table = cmd_simulate(cfg);
        } else if (name == "probe") {
            ProbeOutcome outcome = cmd_probe(cfg);
            table = std::move(outcome.table);
            if (outcome.verdict == Verdict::inconclusive) {
                code = static_cast<int>(ExitCode::inconclusive);
            }
        } else {
            table = cmd_figure(figure_number, cfg);
            if (path.empty()) {
                const std::string file = "fig" + std::to_string(figure_number) + ".csv";
                path = out_dir.empty() ? file : (std::filesystem::path(out_dir) / file).string();
            }
        }
        write_output(table.str(), path, out);
        if (code == static_cast<int>(ExitCode::inconclusive)) {
            err << "probe verdict inconclusive\n";
        }
        return code;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::invalid_config);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::invalid_config);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::runtime_failure);
    }
}

} // namespace fdaloha::cli
