#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "permtail/exact.hpp"
#include "permtail/saddle.hpp"

using json = nlohmann::json;

namespace {

struct CliResult {
    std::string output;  // stdout + stderr
    int exit_code = -1;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(PERMTAIL_CLI_PATH) + " " + args + " 2>&1";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

TEST_CASE("saddle: JSON report matches the library") {
    const auto r = run_cli("saddle --stat descents --x 0.75");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.output);
    const auto sp = permtail::saddle::solve(permtail::saddle::Statistic::Descents, 0.75);
    CHECK(j["t_x"].get<double>() == doctest::Approx(sp.t_x).epsilon(1e-15));
    CHECK(j["sigma2"].get<double>() == doctest::Approx(sp.sigma2).epsilon(1e-15));
    CHECK(j["rate"].get<double>() == doctest::Approx(sp.rate).epsilon(1e-15));
    CHECK(j["ell_D"].size() == 6);
}

TEST_CASE("saddle: major report reproduces the rate identity") {
    const auto r = run_cli("saddle --stat major --x 0.3");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.output);
    const double t = j["t_x"].get<double>();
    CHECK(j["rate"].get<double>() ==
          doctest::Approx(0.3 * t - permtail::cgf::lm(t)).epsilon(1e-12));
}

TEST_CASE("saddle: boundary level exits 2 and names the interval") {
    const auto r = run_cli("saddle --stat descents --x 0.5");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("0.5") != std::string::npos);
    CHECK(r.output.find("1") != std::string::npos);
    CHECK(r.output.find("admissible") != std::string::npos);
}

TEST_CASE("compare: CSV schema, improvement, and 17-digit round trip") {
    const auto r = run_cli("compare --stat descents --x 0.7 --n-list 50,100,200");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(r.output);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"stat", "n", "x", "threshold",
                                              "exact_log", "sldp0_log",
                                              "sldp1_log", "ratio0", "ratio1"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 9);
        CHECK(rows[i][0] == "descents");
        const double ratio0 = std::strtod(rows[i][7].c_str(), nullptr);
        const double ratio1 = std::strtod(rows[i][8].c_str(), nullptr);
        CHECK(std::abs(ratio1 - 1.0) < std::abs(ratio0 - 1.0));
        // printed with 17 significant digits: parsing and re-printing is stable
        const double exact_log = std::strtod(rows[i][4].c_str(), nullptr);
        char reprinted[40];
        std::snprintf(reprinted, sizeof reprinted, "%.17g", exact_log);
        CHECK(rows[i][4] == reprinted);
    }
    // row order follows the input order
    CHECK(rows[1][1] == "50");
    CHECK(rows[2][1] == "100");
    CHECK(rows[3][1] == "200");
}

TEST_CASE("compare: JSON mirrors the CSV fields") {
    const auto r = run_cli("compare --stat major --x 0.3 --n-list 40,80 --format json");
    REQUIRE(r.exit_code == 0);
    const json arr = json::parse(r.output);
    REQUIRE(arr.size() == 2);
    for (const auto& row : arr) {
        for (const char* key : {"stat", "n", "x", "threshold", "exact_log",
                                "sldp0_log", "sldp1_log", "ratio0", "ratio1"})
            CHECK(row.contains(key));
    }
    CHECK(arr[0]["n"] == 40);
}

TEST_CASE("compare: ratio0 approaches 1 for the major index") {
    const auto r = run_cli("compare --stat major --x 0.3 --n-list 40,80,160");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(r.output);
    REQUIRE(rows.size() == 4);
    double prev = 1e9;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double gap =
            std::abs(std::strtod(rows[i][7].c_str(), nullptr) - 1.0);
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("compare: n beyond the cap exits 3") {
    const auto r = run_cli("compare --stat major --x 0.3 --n-list 600");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("size error") != std::string::npos);
}

TEST_CASE("pmf: exact n=3 and n=2 rows") {
    const auto r = run_cli("pmf --stat major --n 3 --method exact");
    REQUIRE(r.exit_code == 0);
    const auto rows = parse_csv(r.output);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"k", "probability"});
    const double expected[] = {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6};
    for (int k = 0; k < 4; ++k) {
        CHECK(rows[k + 1][0] == std::to_string(k));
        CHECK(std::strtod(rows[k + 1][1].c_str(), nullptr) ==
              doctest::Approx(expected[k]).epsilon(1e-15));
    }
    const auto r2 = run_cli("pmf --stat major --n 2 --method exact");
    const auto rows2 = parse_csv(r2.output);
    REQUIRE(rows2.size() == 3);
    CHECK(std::strtod(rows2[1][1].c_str(), nullptr) == 0.5);
    CHECK(std::strtod(rows2[2][1].c_str(), nullptr) == 0.5);
}

TEST_CASE("pmf: exact and fourier agree at n=20") {
    const auto re = run_cli("pmf --stat major --n 20 --method exact");
    const auto rf = run_cli("pmf --stat major --n 20 --method fourier");
    REQUIRE(re.exit_code == 0);
    REQUIRE(rf.exit_code == 0);
    const auto rows_e = parse_csv(re.output);
    const auto rows_f = parse_csv(rf.output);
    REQUIRE(rows_e.size() == rows_f.size());
    double max_diff = 0.0;
    for (std::size_t i = 1; i < rows_e.size(); ++i)
        max_diff = std::max(max_diff,
                            std::abs(std::strtod(rows_e[i][1].c_str(), nullptr) -
                                     std::strtod(rows_f[i][1].c_str(), nullptr)));
    CHECK(max_diff < 1e-10);
}

TEST_CASE("pmf: size and domain failures") {
    CHECK(run_cli("pmf --stat major --n 500 --method exact").exit_code == 3);
    CHECK(run_cli("pmf --stat descents --n 10 --method fourier").exit_code == 2);
}

TEST_CASE("mc: byte-identical reruns and sane moments") {
    const std::string args =
        "mc --stat descents --n 30 --trials 200000 --seed 31 --thresholds 16,20";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.output == b.output);

    const json j = json::parse(a.output);
    CHECK(j["statistic"] == "descents");
    CHECK(j["trials"] == 200000);
    CHECK(j["seed"] == 31);
    const double mean = j["mean"].get<double>();
    CHECK(std::abs(mean - 14.5) <= 4.0 * std::sqrt(31.0 / 12.0 / 200000.0));
    const double var = j["variance"].get<double>();
    CHECK(std::abs(var - 31.0 / 12.0) < 0.1);
    CHECK(j["tail_hits"].contains("16"));
    CHECK(j["tail_freq"]["16"].contains("stderr"));
}

TEST_CASE("invalid invocations do not crash") {
    CHECK(run_cli("saddle --x 0.75 --stat bogus").exit_code != 0);
    CHECK(run_cli("nonsense").exit_code != 0);
    CHECK(run_cli("compare --stat descents --x 0.7").exit_code != 0);  // missing n
    CHECK(run_cli("saddle").exit_code != 0);                           // missing x
}
