// Command-line front end: solve dual points, compare exact tails against the
// sharp approximations, export PMFs, and run seeded Monte Carlo checks.
//
// Exit codes: 0 success, 2 domain error, 3 size error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include "permtail/exact.hpp"
#include "permtail/montecarlo.hpp"
#include "permtail/sldp.hpp"

namespace {

using json = nlohmann::ordered_json;
using permtail::saddle::Statistic;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Statistic parse_stat(const std::string& s) {
    if (s == "descents") return Statistic::Descents;
    if (s == "major") return Statistic::MajorIndex;
    throw permtail::DomainError("unknown statistic: " + s);
}

std::optional<std::filesystem::path> cache_dir_from(const std::string& flag) {
    // PERMTAIL_CACHE overrides --cache-dir
    if (const char* env = std::getenv("PERMTAIL_CACHE"); env && *env)
        return std::filesystem::path(env);
    if (!flag.empty()) return std::filesystem::path(flag);
    return std::nullopt;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(out_path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open output file " + out_path);
    os << text;
}

// ---------------------------------------------------------------------------

int cmd_saddle(const std::string& stat, double x, int order,
               const std::string& format, const std::string& out) {
    const Statistic st = parse_stat(stat);
    const auto sp = permtail::saddle::solve(st, x, order);

    std::ostringstream os;
    if (format == "text") {
        os << "statistic  " << permtail::saddle::name(st) << "\n"
           << "x          " << fmt17(sp.x) << "\n"
           << "t_x        " << fmt17(sp.t_x) << "\n"
           << "sigma2     " << fmt17(sp.sigma2) << "\n"
           << "rate       " << fmt17(sp.rate) << "\n";
        for (int k = 1; k <= sp.max_order(); ++k)
            os << "ell_D(" << k << ")   " << fmt17(sp.ell_D[k]) << "\n";
        if (st == Statistic::MajorIndex) {
            for (int k = 1; k <= sp.max_order(); ++k)
                os << "ell_M(" << k << ")   " << fmt17(sp.ell_M[k]) << "\n";
            for (int k = 0; k <= sp.max_order(); ++k)
                os << "h(" << k << ")       " << fmt17(sp.h[k]) << "\n";
        }
    } else {
        json j;
        j["statistic"] = permtail::saddle::name(st);
        j["x"] = sp.x;
        j["t_x"] = sp.t_x;
        j["sigma2"] = sp.sigma2;
        j["rate"] = sp.rate;
        j["ell_D"] = std::vector<double>(sp.ell_D.begin() + 1, sp.ell_D.end());
        if (st == Statistic::MajorIndex) {
            j["ell_M"] = std::vector<double>(sp.ell_M.begin() + 1, sp.ell_M.end());
            j["h"] = sp.h;
        }
        os << j.dump(2) << "\n";
    }
    write_output(os.str(), out);
    return 0;
}

// ---------------------------------------------------------------------------

struct CompareRow {
    long n = 0;
    long long threshold = 0;
    std::optional<double> exact_log;
    double sldp0_log = 0.0;
    double sldp1_log = 0.0;
    std::optional<double> ratio0;
    std::optional<double> ratio1;
};

int cmd_compare(const std::string& stat, double x, std::vector<long> n_list,
                const std::string& format, const std::string& out,
                const std::string& cache_flag) {
    const Statistic st = parse_stat(stat);
    const auto cache = cache_dir_from(cache_flag);
    const auto sp = permtail::saddle::solve(st, x);
    const permtail::exact::SizeCaps caps;
    for (long n : n_list) {
        const long cap =
            st == Statistic::Descents ? caps.eulerian : caps.mahonian;
        if (n > cap)
            throw permtail::SizeError("compare: n = " + std::to_string(n) +
                                      " exceeds the exact-table cap " +
                                      std::to_string(cap));
    }

    // rows are independent; fill them concurrently, print in input order
    std::vector<std::future<CompareRow>> futures;
    futures.reserve(n_list.size());
    for (long n : n_list) {
        futures.push_back(std::async(std::launch::async, [&, n] {
            CompareRow r;
            r.n = n;
            const auto dist = permtail::exact::row(st, n, cache);
            const auto ex = permtail::exact::tail(dist, x);
            r.threshold = ex.threshold;
            if (!ex.empty) r.exact_log = ex.log_value;
            const auto a0 = st == Statistic::Descents
                                ? permtail::sldp::expansion_descents(sp, n, 0)
                                : permtail::sldp::expansion_major(sp, n, 0);
            const auto a1 = st == Statistic::Descents
                                ? permtail::sldp::expansion_descents(sp, n, 1)
                                : permtail::sldp::expansion_major(sp, n, 1);
            r.sldp0_log = a0.value_log;
            r.sldp1_log = a1.value_log;
            if (r.exact_log) {
                r.ratio0 = std::exp(*r.exact_log - r.sldp0_log);
                r.ratio1 = std::exp(*r.exact_log - r.sldp1_log);
            }
            return r;
        }));
    }

    std::vector<CompareRow> rows;
    rows.reserve(futures.size());
    for (auto& f : futures) rows.push_back(f.get());

    std::ostringstream os;
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json j;
            j["stat"] = stat;
            j["n"] = r.n;
            j["x"] = x;
            j["threshold"] = r.threshold;
            j["exact_log"] = r.exact_log ? json(*r.exact_log) : json(nullptr);
            j["sldp0_log"] = r.sldp0_log;
            j["sldp1_log"] = r.sldp1_log;
            j["ratio0"] = r.ratio0 ? json(*r.ratio0) : json(nullptr);
            j["ratio1"] = r.ratio1 ? json(*r.ratio1) : json(nullptr);
            arr.push_back(std::move(j));
        }
        os << arr.dump(2) << "\n";
    } else {
        os << "stat,n,x,threshold,exact_log,sldp0_log,sldp1_log,ratio0,ratio1\n";
        for (const auto& r : rows) {
            os << stat << ',' << r.n << ',' << fmt17(x) << ',' << r.threshold
               << ',' << (r.exact_log ? fmt17(*r.exact_log) : "NA") << ','
               << fmt17(r.sldp0_log) << ',' << fmt17(r.sldp1_log) << ','
               << (r.ratio0 ? fmt17(*r.ratio0) : "NA") << ','
               << (r.ratio1 ? fmt17(*r.ratio1) : "NA") << "\n";
        }
    }
    write_output(os.str(), out);
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_pmf(const std::string& stat, long n, const std::string& method,
            double tilt, const std::string& out, const std::string& cache_flag) {
    const Statistic st = parse_stat(stat);
    std::ostringstream os;
    os << "k,probability\n";
    if (method == "exact") {
        const auto dist = permtail::exact::row(st, n, cache_dir_from(cache_flag));
        for (long k = 0; k <= dist.max_value(); ++k) {
            mpq_class p(dist.counts[k], dist.total);
            p.canonicalize();
            os << k << ',' << fmt17(p.get_d()) << "\n";
        }
    } else if (method == "fourier") {
        if (st != Statistic::MajorIndex)
            throw permtail::DomainError(
                "pmf: method fourier applies to the major index only");
        const auto pmf = permtail::exact::pmf_via_fourier(n, tilt);
        for (std::size_t k = 0; k < pmf.probabilities.size(); ++k)
            os << k << ',' << fmt17(pmf.probabilities[k]) << "\n";
    } else {
        throw permtail::DomainError("pmf: method must be exact or fourier");
    }
    write_output(os.str(), out);
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_mc(const std::string& stat, long n, long trials, std::uint64_t seed,
           const std::vector<long>& thresholds, const std::string& out) {
    const Statistic st = parse_stat(stat);
    const auto stats = permtail::mc::sample_stats(st, n, trials, seed, thresholds);

    json j;
    j["statistic"] = permtail::saddle::name(st);
    j["n"] = stats.n;
    j["trials"] = stats.trials;
    j["mean"] = stats.mean;
    j["variance"] = stats.variance;
    j["seed"] = stats.seed;
    json hits = json::object();
    json freq = json::object();
    for (const auto& [thr, count] : stats.tail_hits) {
        const double p = static_cast<double>(count) / stats.trials;
        hits[std::to_string(thr)] = count;
        json f;
        f["estimate"] = p;
        f["stderr"] = std::sqrt(p * (1.0 - p) / stats.trials);
        freq[std::to_string(thr)] = std::move(f);
    }
    j["tail_hits"] = std::move(hits);
    j["tail_freq"] = std::move(freq);
    write_output(j.dump(2) + "\n", out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sharp large-deviation tails for permutation descent statistics"};
    app.require_subcommand(1);

    std::string stat = "descents";
    std::string format;
    std::string out;
    std::string cache_dir;
    std::string method = "exact";
    double x = 0.0;
    double tilt = 0.0;
    int order = 6;
    long n = 0;
    long trials = 100000;
    std::uint64_t seed = 1;
    std::vector<long> n_list;
    std::vector<long> thresholds;

    auto* saddle_cmd = app.add_subcommand("saddle", "solve the dual point for x");
    saddle_cmd->add_option("--stat", stat)->check(CLI::IsMember({"descents", "major"}));
    saddle_cmd->add_option("--x", x)->required();
    saddle_cmd->add_option("--order", order);
    saddle_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));
    saddle_cmd->callback([&] {
        std::exit(cmd_saddle(stat, x, order, format.empty() ? "json" : format, out));
    });

    auto* compare_cmd =
        app.add_subcommand("compare", "exact tail vs sharp approximations");
    compare_cmd->add_option("--stat", stat)->check(CLI::IsMember({"descents", "major"}));
    compare_cmd->add_option("--x", x)->required();
    compare_cmd->add_option("--n-list,--n", n_list)->required()->delimiter(',');
    compare_cmd->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    compare_cmd->add_option("--out", out);
    compare_cmd->add_option("--cache-dir", cache_dir);
    compare_cmd->callback([&] {
        std::exit(cmd_compare(stat, x, n_list, format.empty() ? "csv" : format,
                              out, cache_dir));
    });

    auto* pmf_cmd = app.add_subcommand("pmf", "exact or Fourier-inverted PMF");
    pmf_cmd->add_option("--stat", stat)->check(CLI::IsMember({"descents", "major"}));
    pmf_cmd->add_option("--n", n)->required();
    pmf_cmd->add_option("--method", method)->check(CLI::IsMember({"exact", "fourier"}));
    pmf_cmd->add_option("--tilt", tilt);
    pmf_cmd->add_option("--out", out);
    pmf_cmd->add_option("--cache-dir", cache_dir);
    pmf_cmd->callback([&] { std::exit(cmd_pmf(stat, n, method, tilt, out, cache_dir)); });

    auto* mc_cmd = app.add_subcommand("mc", "seeded Monte Carlo sanity check");
    mc_cmd->add_option("--stat", stat)->check(CLI::IsMember({"descents", "major"}));
    mc_cmd->add_option("--n", n)->required();
    mc_cmd->add_option("--trials", trials);
    mc_cmd->add_option("--seed", seed);
    mc_cmd->add_option("--thresholds", thresholds)->delimiter(',');
    mc_cmd->add_option("--out", out);
    mc_cmd->callback([&] { std::exit(cmd_mc(stat, n, trials, seed, thresholds, out)); });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const permtail::SizeError& e) {
        std::cerr << "size error: " << e.what() << "\n";
        return 3;
    } catch (const permtail::DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const permtail::OrderError& e) {
        std::cerr << "order error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
