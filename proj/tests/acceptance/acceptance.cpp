// Acceptance suite: one PASS/FAIL line per criterion A1..A8.
// Usage: acceptance [A1 A2 ...]   (default: all)

#include "fdaloha/expcli.hpp"
#include "golden.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fdaloha;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [fail: " << what << "]";
        }
    }
};

std::string fmt(double v)
{
    return cli::format_number(v);
}

cli::CsvData run_csv(const std::vector<std::string>& args, Outcome& o)
{
    std::ostringstream out;
    std::ostringstream err;
    std::vector<std::string> full = args;
    full.insert(full.end(), {"--out", "-"});
    const int code = cli::run_cli(full, out, err);
    if (code != 0) {
        o.require(false, args.front() + " exited with " + std::to_string(code) + ": " + err.str());
        return {};
    }
    return cli::parse_csv(out.str());
}

std::string column_text(const cli::CsvData& d, std::size_t row, const std::string& col)
{
    for (std::size_t i = 0; i < d.columns.size(); ++i) {
        if (d.columns[i] == col) {
            return d.rows.at(row).at(i);
        }
    }
    return {};
}

bool within(double sim, double lo, double hi, double ana, double rel)
{
    const double half = 0.5 * (hi - lo);
    return std::abs(sim - ana) <= std::max(half, rel * std::abs(ana));
}

// Omega cross-validation on the full parameter grid.
void a1(Outcome& o)
{
    QuadratureConfig grid;
    grid.rel_tol = 1e-7;
    double worst1 = 0.0;
    double worst2 = 0.0;
    bool ordered = true;
    std::uint64_t seed = 1000;
    for (const double alpha : {2.5, 3.0, 4.0, 6.0}) {
        for (const double r : {1.0, 2.0}) {
            for (const double theta : {0.5, 1.0, 2.0, 10.0}) {
                const ChannelParams ch{alpha, r, theta};
                const double o1 = omega1(ch);
                const double o2 = omega2(ch);
                const double oracle1 = oracles::omega1_integral_oracle(ch, grid);
                const double oracle2 = oracles::omega2_mc_oracle(ch, 1000000, seed++).omega2;
                worst1 = std::max(worst1, std::abs(o1 - oracle1) / o1);
                worst2 = std::max(worst2, std::abs(o2 - oracle2) / o2);
                ordered = ordered && o1 <= o2 && o2 <= 2.0 * o1;
            }
        }
    }
    o.detail << "max rel err omega1 " << fmt(worst1) << " (< 0.005), omega2 " << fmt(worst2)
             << " (< 0.01), ordering " << (ordered ? "holds" : "violated") << " on 32 points";
    o.require(worst1 < 5e-3, "omega1 tolerance");
    o.require(worst2 < 1e-2, "omega2 tolerance");
    o.require(ordered, "omega1 <= omega2 <= 2 omega1");
}

// Saturated throughput against the closed form.
void a2(Outcome& o)
{
    const double o1 = golden::omega1;
    const double o2 = golden::omega2;
    for (const double lambda : {0.05, 0.2}) {
        for (const double q : {0.3, 0.7}) {
            const auto d = run_csv({"simulate", "--saturated", "true", "--lambda", fmt(lambda), "--q",
                                    fmt(q), "--runs", "40", "--horizon", "20000", "--seed", "2"},
                                   o);
            if (d.rows.empty()) {
                return;
            }
            const double ana = std::exp(-lambda * q * (2.0 * o1 + q * (o2 - 2.0 * o1)));
            const double sim = d.numbers("ps_sim")[0];
            const double lo = d.numbers("ps_lo")[0];
            const double hi = d.numbers("ps_hi")[0];
            const bool ok = lo <= ana && ana <= hi;
            o.detail << " (lambda=" << fmt(lambda) << ",q=" << fmt(q) << ": sim " << fmt(sim) << " ["
                     << fmt(lo) << "," << fmt(hi) << "] vs " << fmt(ana) << ")";
            o.require(ok, "closed form outside CI");
        }
    }
}

// Figure 1 operating points inside the stable region.
void a3(Outcome& o)
{
    const auto d = run_csv({"figure", "1", "--q-grid", "0.35,0.45,0.55,0.62", "--seed", "3"}, o);
    if (d.rows.empty()) {
        return;
    }
    const auto q = d.numbers("q");
    const auto ps_ana = d.numbers("ps_ana");
    const auto ne_ana = d.numbers("ne_ana");
    const auto ps = d.numbers("ps_sim");
    const auto ps_lo = d.numbers("ps_lo");
    const auto ps_hi = d.numbers("ps_hi");
    const auto ne = d.numbers("ne_sim");
    const auto ne_lo = d.numbers("ne_lo");
    const auto ne_hi = d.numbers("ne_hi");
    for (std::size_t i = 0; i < q.size(); ++i) {
        o.detail << " (q=" << fmt(q[i]) << ": ps " << fmt(ps[i]) << " vs " << fmt(ps_ana[i])
                 << ", ne " << fmt(ne[i]) << " vs " << fmt(ne_ana[i]) << ")";
        o.require(std::isfinite(ps_ana[i]), "grid point outside the stable region");
        o.require(within(ps[i], ps_lo[i], ps_hi[i], ps_ana[i], 0.05), "ps mismatch");
        o.require(within(ne[i], ne_lo[i], ne_hi[i], ne_ana[i], 0.05), "nonempty mismatch");
    }
}

// Stability boundary probes, FD and HD.
void a4(Outcome& o)
{
    int checked = 0;
    for (const char* mode : {"fd", "hd"}) {
        for (const double lambda : {0.1, 0.2}) {
            for (const double q : {0.4, 0.7}) {
                for (const double mult : {0.9, 1.1}) {
                    const auto d = run_csv({"probe", "--mode", mode, "--lambda", fmt(lambda), "--q",
                                            fmt(q), "--a-mult", fmt(mult), "--horizon", "10000",
                                            "--seed", "4"},
                                           o);
                    if (d.rows.empty()) {
                        continue;
                    }
                    const std::string verdict = column_text(d, 0, "verdict");
                    const std::string expected = mult < 1.0 ? "stable" : "unstable";
                    ++checked;
                    if (verdict != expected) {
                        o.detail << " (" << mode << " lambda=" << fmt(lambda) << " q=" << fmt(q)
                                 << " a=" << fmt(mult) << "*bound: " << verdict << ")";
                        o.require(false, "verdict");
                    }
                }
            }
        }
    }
    o.detail << " " << checked << "/16 probes returned the expected verdict";
}

// Delay: FD against the closed form, HD under its bound.
void a5(Outcome& o)
{
    const double lambda = 0.15;
    const auto d = run_csv({"figure", "3", "--lambda", fmt(lambda), "--a-grid", "0.02:0.14:4",
                            "--runs", "40", "--seed", "5"},
                           o);
    if (d.rows.empty()) {
        return;
    }
    const SpatialConstants sc = cli::resolve_spatial(ChannelParams{}, 0.0);
    const double a_star = fd_optimal_access(lambda, sc).a_star;
    const auto a = d.numbers("a");
    const auto fd_ana = d.numbers("d_fd_ana");
    const auto fd_sim = d.numbers("d_fd_sim");
    const auto fd_lo = d.numbers("d_fd_lo");
    const auto fd_hi = d.numbers("d_fd_hi");
    const auto hd_bound = d.numbers("d_hd_bound");
    const auto hd_sim = d.numbers("d_hd_sim");
    int fd_points = 0;
    int hd_points = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] <= 0.8 * a_star) {
            ++fd_points;
            o.detail << " (FD a=" << fmt(a[i]) << ": " << fmt(fd_sim[i]) << " vs " << fmt(fd_ana[i]) << ")";
            o.require(within(fd_sim[i], fd_lo[i], fd_hi[i], fd_ana[i], 0.05), "FD delay mismatch");
        }
        if (std::isfinite(hd_bound[i])) {
            ++hd_points;
            o.detail << " (HD a=" << fmt(a[i]) << ": " << fmt(hd_sim[i]) << " <= " << fmt(hd_bound[i]) << ")";
            o.require(hd_sim[i] <= hd_bound[i], "HD delay above its bound");
        }
    }
    o.require(fd_points > 0 && hd_points > 0, "no grid points checked");
}

// Asymptotics of the boundary and throughput curves.
void a6(Outcome& o)
{
    const std::string grid = "0.01:5:log:400";
    const auto f2 = run_csv({"figure", "2", "--lambda-grid", grid, "--eta", "0.05"}, o);
    const auto f4 = run_csv({"figure", "4", "--lambda-grid", grid, "--eta", "0.05"}, o);
    if (f2.rows.empty() || f4.rows.empty()) {
        return;
    }
    const auto hd = f2.numbers("astar_hd");
    const auto fd = f2.numbers("astar_fd");
    const double ratio_lo = fd.front() / hd.front();
    const double ratio_hi = fd.back() / hd.back();
    const auto lambdas = f4.numbers("lambda");
    const auto tput_hd = f4.numbers("tput_hd");
    const auto tput_fd = f4.numbers("tput_fd");
    const double limit = std::exp(-1.0) / golden::omega1;
    const double hd_gap = std::abs(tput_hd.back() - limit) / limit;
    const auto peak = static_cast<std::size_t>(
        std::max_element(tput_fd.begin(), tput_fd.end()) - tput_fd.begin());
    const double lambda_peak = lambdas[peak];
    const double inv_omega2 = 1.0 / golden::omega2;
    o.detail << "ratio " << fmt(ratio_lo) << " at 0.01, " << fmt(ratio_hi) << " at 5; tau_hd(5) "
             << fmt(tput_hd.back()) << " vs " << fmt(limit) << " (rel " << fmt(hd_gap)
             << "); FD peak at lambda " << fmt(lambda_peak) << ", 1/omega2 " << fmt(inv_omega2);
    o.require(ratio_lo >= 1.9, "low-density ratio");
    o.require(ratio_hi <= 1.1, "high-density ratio");
    o.require(hd_gap < 0.02, "HD throughput limit");
    o.require(peak > 0 && peak + 1 < lambdas.size(), "FD peak not interior");
    o.require(std::abs(lambda_peak - inv_omega2) <= 0.03, "FD peak away from 1/omega2");
    o.require(std::abs(lambda_peak - 0.09) <= 0.03, "FD peak away from 0.09");
}

// Imperfect cancellation scales success by beta.
void a7(Outcome& o)
{
    const double beta = std::exp(-0.1);
    const std::vector<std::string> common{"simulate", "--saturated", "true", "--lambda", "0.2",
                                          "--q", "0.5", "--runs", "40", "--horizon", "20000",
                                          "--seed", "7"};
    auto ideal_args = common;
    ideal_args.insert(ideal_args.end(), {"--ic-model", "perfect"});
    auto bound_args = common;
    bound_args.insert(bound_args.end(), {"--ic-model", "bound", "--eta", "0.05"});
    const auto ideal = run_csv(ideal_args, o);
    const auto bound = run_csv(bound_args, o);
    const auto om = run_csv({"omega", "--eta", "0.05"}, o);
    const auto f2 = run_csv({"figure", "2", "--eta", "0.05"}, o);
    const auto f4 = run_csv({"figure", "4", "--eta", "0.05"}, o);
    if (ideal.rows.empty() || bound.rows.empty() || om.rows.empty() || f2.rows.empty() || f4.rows.empty()) {
        return;
    }
    const double target = beta * ideal.numbers("ps_sim")[0];
    const double lo = bound.numbers("ps_lo")[0];
    const double hi = bound.numbers("ps_hi")[0];
    o.detail << "beta*ps_ideal " << fmt(target) << " vs bound-IC ps " << fmt(bound.numbers("ps_sim")[0])
             << " [" << fmt(lo) << "," << fmt(hi) << "]";
    o.require(lo <= target && target <= hi, "beta scaling outside CI");
    o.require(std::abs(om.numbers("beta")[0] - beta) <= 1e-12, "beta value");

    double worst = 0.0;
    auto check_multiple = [&](const std::vector<double>& base, const std::vector<double>& scaled) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            worst = std::max(worst, std::abs(scaled[i] - beta * base[i]) / (beta * base[i]));
        }
    };
    check_multiple(f2.numbers("astar_fd"), f2.numbers("astar_fd_ic"));
    check_multiple(f4.numbers("tput_fd"), f4.numbers("tput_fd_ic"));
    const auto lambdas = f4.numbers("lambda");
    const auto astar_ic = f2.numbers("astar_fd_ic");
    const auto tput_ic = f4.numbers("tput_fd_ic");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        worst = std::max(worst, std::abs(tput_ic[i] - 2.0 * lambdas[i] * astar_ic[i]) / tput_ic[i]);
    }
    o.detail << "; max rel deviation of beta-scaled columns " << fmt(worst);
    // columns carry 12 significant digits
    o.require(worst < 1e-10, "beta-scaled columns are not exact multiples");
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Byte-identical figure reruns.
void a8(Outcome& o)
{
    const auto dir = std::filesystem::temp_directory_path() / "fdaloha_acceptance_a8";
    std::filesystem::remove_all(dir);
    const std::vector<std::vector<std::string>> figures{
        {"figure", "1", "--q-grid", "0.35,0.5", "--runs", "4", "--horizon", "1000"},
        {"figure", "2"},
        {"figure", "3", "--a-grid", "0.04,0.1", "--runs", "4", "--horizon", "1000"},
        {"figure", "4", "--eta", "0.05"},
    };
    int identical = 0;
    for (const auto& args : figures) {
        std::vector<std::string> texts;
        for (const char* run : {"a", "b", "c"}) {
            auto full = args;
            const auto path = dir / run / ("fig" + args[1] + ".csv");
            full.insert(full.end(), {"--seed", "8", "--out", path.string()});
            if (std::string(run) == "c") {
                full.insert(full.end(), {"--jobs", "2"});
            }
            std::ostringstream out;
            std::ostringstream err;
            const int code = cli::run_cli(full, out, err);
            o.require(code == 0, "figure " + args[1] + " exited with " + std::to_string(code));
            texts.push_back(slurp(path));
        }
        const bool same = !texts[0].empty() && texts[0] == texts[1] && texts[0] == texts[2];
        identical += same ? 1 : 0;
        o.require(same, "figure " + args[1] + " output differs between reruns");
    }
    o.detail << identical << "/4 figures byte-identical across three reruns (jobs 1, 1, 2)";
    std::filesystem::remove_all(dir);
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, void (*)(Outcome&)>> criteria{
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4},
        {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8},
    };
    std::set<std::string> selected(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        if (!selected.empty() && selected.count(name) == 0) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << name << ' ' << (o.pass ? "PASS" : "FAIL") << ": " << o.detail.str() << " ("
                  << static_cast<long>(secs) << " s)" << std::endl;
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
