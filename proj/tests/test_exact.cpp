#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "oracles.hpp"
#include "permtail/exact.hpp"
#include "permtail/saddle.hpp"

using namespace permtail;
using saddle::Statistic;

namespace {

std::vector<long> to_longs(const std::vector<mpz_class>& v) {
    std::vector<long> out;
    for (const auto& z : v) out.push_back(z.get_si());
    return out;
}

// the two-argument mpq_class constructor does not canonicalize
mpq_class frac(const mpz_class& num, long den) {
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

}  // namespace

TEST_CASE("eulerian rows: known values and brute force") {
    CHECK(to_longs(exact::eulerian(2).counts) == std::vector<long>{1, 1});
    CHECK(to_longs(exact::eulerian(3).counts) == std::vector<long>{1, 4, 1});
    CHECK(to_longs(exact::eulerian(4).counts) == std::vector<long>{1, 11, 11, 1});
    for (int n = 2; n <= 8; ++n) {
        const auto rows = oracles::brute_force_rows(n);
        const auto dist = exact::eulerian(n);
        REQUIRE(dist.counts.size() == rows.descents.size());
        for (std::size_t k = 0; k < rows.descents.size(); ++k)
            CHECK(dist.counts[k] == mpz_class(static_cast<long>(rows.descents[k])));
    }
    CHECK_THROWS_AS(exact::eulerian(1001), SizeError);
    CHECK_THROWS_AS(exact::eulerian(13, exact::SizeCaps{.eulerian = 12}), SizeError);
}

TEST_CASE("mahonian rows: known values and brute force") {
    CHECK(to_longs(exact::mahonian(2).counts) == std::vector<long>{1, 1});
    CHECK(to_longs(exact::mahonian(3).counts) == std::vector<long>{1, 2, 2, 1});
    CHECK(to_longs(exact::mahonian(4).counts) ==
          std::vector<long>{1, 3, 5, 6, 5, 3, 1});
    for (int n = 2; n <= 8; ++n) {
        const auto rows = oracles::brute_force_rows(n);
        const auto dist = exact::mahonian(n);
        REQUIRE(dist.counts.size() == rows.major.size());
        for (std::size_t k = 0; k < rows.major.size(); ++k)
            CHECK(dist.counts[k] == mpz_class(static_cast<long>(rows.major[k])));
    }
    CHECK_THROWS_AS(exact::mahonian(401), SizeError);
}

TEST_CASE("row sums, symmetry, exact moments") {
    for (long n = 2; n <= 60; ++n) {
        for (Statistic st : {Statistic::Descents, Statistic::MajorIndex}) {
            const auto dist = st == Statistic::Descents ? exact::eulerian(n)
                                                        : exact::mahonian(n);
            mpz_class sum = 0;
            for (const auto& c : dist.counts) sum += c;
            CHECK(sum == dist.total);
            const long top = dist.max_value();
            for (long k = 0; k <= top / 2; ++k)
                CHECK(dist.counts[k] == dist.counts[top - k]);
            if (st == Statistic::Descents) {
                CHECK(dist.mean() == mpq_class(n - 1, 2));
                CHECK(dist.variance() == mpq_class(n + 1, 12));
            } else {
                CHECK(dist.mean() == mpq_class(n * (n - 1), 4));
                CHECK(dist.variance() ==
                      mpq_class(mpz_class(n) * (n - 1) * (2 * n + 5), 72));
            }
        }
    }
}

TEST_CASE("tails") {
    SUBCASE("descents n=4, x=0.5") {
        const auto t = exact::tail(Statistic::Descents, 4, 0.5);
        CHECK(t.threshold == 2);
        CHECK(t.numerator == 12);
        CHECK(std::abs(t.log_value - std::log(0.5)) < 1e-14);
        CHECK(!t.empty);
    }
    SUBCASE("x near zero covers the whole support except D=0") {
        const auto t = exact::tail(Statistic::Descents, 10, 1e-6);
        CHECK(t.threshold == 1);
        CHECK(std::abs(t.log_value) < 1e-6);  // 1 - 1/10!
    }
    SUBCASE("beyond the support is an explicit empty tail") {
        const auto t = exact::tail(Statistic::MajorIndex, 4, 0.5);
        CHECK(t.threshold == 8);
        CHECK(t.empty);
        CHECK(std::isinf(t.log_value));
    }
    SUBCASE("domain and size validation") {
        CHECK_THROWS_AS(exact::tail(Statistic::Descents, 10, 0.0), DomainError);
        CHECK_THROWS_AS(exact::tail(Statistic::Descents, 10, 1.0), DomainError);
        CHECK_THROWS_AS(exact::tail(Statistic::MajorIndex, 10, 0.6), DomainError);
        CHECK_THROWS_AS(exact::tail(Statistic::Descents, 1001, 0.7), SizeError);
    }
}

TEST_CASE("log of big integers") {
    mpz_class big;
    mpz_ui_pow_ui(big.get_mpz_t(), 7, 400);  // 7^400, ~338 digits
    CHECK(std::abs(exact::log_mpz(big) - 400.0 * std::log(7.0)) /
              (400.0 * std::log(7.0)) <
          1e-15);
    CHECK_THROWS_AS(exact::log_mpz(mpz_class(0)), DomainError);
}

TEST_CASE("irwin_hall_tail") {
    CHECK(exact::irwin_hall_tail(2, 1) == doctest::Approx(0.5).epsilon(1e-15));
    for (int n : {1, 5, 12}) CHECK(exact::irwin_hall_tail(n, 0) == 1.0);
    CHECK(exact::irwin_hall_tail(5, 3) == doctest::Approx(27.0 / 120.0).epsilon(1e-12));
    CHECK_THROWS_AS(exact::irwin_hall_tail(16, 5), SizeError);

    // Tanny: Eulerian tails equal Irwin-Hall tails
    for (int n = 2; n <= 12; ++n) {
        const auto dist = exact::eulerian(n);
        mpz_class acc = 0;
        for (long m = n; m >= 0; --m) {
            if (m <= dist.max_value()) acc += dist.counts[m];
            const double exact_tail =
                mpq_class(acc, dist.total).get_d();
            CHECK(std::abs(exact::irwin_hall_tail(n, m) - exact_tail) < 1e-9);
        }
    }
}

TEST_CASE("fourier inversion of the Mahonian PMF") {
    SUBCASE("n=3 exact values") {
        const auto pmf = exact::pmf_via_fourier(3);
        REQUIRE(pmf.probabilities.size() == 4);
        const double expected[] = {1.0 / 6, 2.0 / 6, 2.0 / 6, 1.0 / 6};
        for (int k = 0; k < 4; ++k)
            CHECK(std::abs(pmf.probabilities[k] - expected[k]) < 1e-12);
    }
    SUBCASE("normalization and DP equivalence") {
        for (long n : {3L, 10L, 37L, 60L}) {
            const auto pmf = exact::pmf_via_fourier(n);
            const auto dist = exact::mahonian(n);
            double total = 0.0;
            double max_diff = 0.0;
            for (long k = 0; k <= dist.max_value(); ++k) {
                total += pmf.probabilities[k];
                const double p = mpq_class(dist.counts[k], dist.total).get_d();
                max_diff = std::max(max_diff, std::abs(p - pmf.probabilities[k]));
            }
            CHECK(std::abs(total - 1.0) < 1e-10);
            CHECK(max_diff < 1e-10);
            CHECK(pmf.max_negative_mass > -1e-9);
        }
    }
    SUBCASE("tilted inversion pins the deep tail") {
        const long n = 60;
        const double x = 0.3;
        const auto sp = saddle::solve(Statistic::MajorIndex, x);
        const auto pmf = exact::pmf_via_fourier(n, sp.t_x / n);
        const auto ex = exact::tail(exact::mahonian(n), x);
        double tail_sum = 0.0;
        for (long k = static_cast<long>(ex.threshold);
             k < static_cast<long>(pmf.probabilities.size()); ++k)
            tail_sum += pmf.probabilities[k];
        CHECK(std::abs(std::log(tail_sum) - ex.log_value) < 1e-9);
    }
    SUBCASE("size cap") {
        CHECK_THROWS_AS(exact::pmf_via_fourier(401), SizeError);
    }
}

TEST_CASE("row cache round trip") {
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("permtail_cache_test_" +
                                     std::to_string(::getpid()));
    struct Cleanup {
        fs::path dir;
        ~Cleanup() { fs::remove_all(dir); }
    } cleanup{dir};

    const auto computed = exact::mahonian(30);
    exact::store_cached(computed, dir);
    const auto loaded = exact::load_cached(Statistic::MajorIndex, 30, dir);
    REQUIRE(loaded.has_value());
    CHECK(loaded->n == 30);
    CHECK(loaded->statistic == Statistic::MajorIndex);
    REQUIRE(loaded->counts.size() == computed.counts.size());
    for (std::size_t k = 0; k < computed.counts.size(); ++k)
        CHECK(loaded->counts[k] == computed.counts[k]);
    CHECK(loaded->total == computed.total);

    // deterministic file bytes: storing the same row twice is byte-identical
    const fs::path file = exact::cache_file(dir, Statistic::MajorIndex, 30);
    std::ifstream f1(file, std::ios::binary);
    std::string bytes1((std::istreambuf_iterator<char>(f1)), {});
    exact::store_cached(computed, dir);
    std::ifstream f2(file, std::ios::binary);
    std::string bytes2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(bytes1 == bytes2);
    CHECK(bytes1.substr(0, 4) == "PTCD");

    // row() serves identical values with and without the cache
    const auto via_cache = exact::row(Statistic::MajorIndex, 30, dir);
    const auto without = exact::row(Statistic::MajorIndex, 30, std::nullopt);
    for (std::size_t k = 0; k < without.counts.size(); ++k)
        CHECK(via_cache.counts[k] == without.counts[k]);

    // mismatched statistic is not served from the descents file
    CHECK(!exact::load_cached(Statistic::Descents, 30, dir).has_value());

    // corrupt magic falls back to recomputation
    {
        std::ofstream corrupt(file, std::ios::binary | std::ios::trunc);
        corrupt << "junk";
    }
    CHECK(!exact::load_cached(Statistic::MajorIndex, 30, dir).has_value());
    const auto recomputed = exact::row(Statistic::MajorIndex, 30, dir);
    CHECK(recomputed.counts[5] == computed.counts[5]);
}
