#pragma once

#include <gmpxx.h>

#include <filesystem>
#include <optional>
#include <vector>

#include "permtail/saddle.hpp"

// Exact ground truth: big-integer Eulerian and Mahonian rows, their tails,
// the Irwin-Hall closed form, and tilted characteristic-function inversion.

namespace permtail::exact {

using saddle::Statistic;

struct SizeCaps {
    long eulerian = 1000;
    long mahonian = 400;
};

struct CountDistribution {
    Statistic statistic = Statistic::Descents;
    long n = 0;
    std::vector<mpz_class> counts;  // indexed by statistic value
    mpz_class total;                // n!

    long max_value() const { return static_cast<long>(counts.size()) - 1; }
    mpq_class mean() const;
    mpq_class variance() const;
    // exact r-th central moment
    mpq_class central_moment(int r) const;
};

// Eulerian row A(n, 0..n-1): A(n,k) = (k+1)A(n-1,k) + (n-k)A(n-1,k-1).
CountDistribution eulerian(long n, const SizeCaps& caps = {});

// Mahonian row: coefficients of prod_{k=1}^{n} (1 + q + ... + q^{k-1}),
// computed by one prefix-sum pass and one windowed-difference pass per k.
CountDistribution mahonian(long n, const SizeCaps& caps = {});

// log of a positive big integer via top-word extraction plus bit length;
// relative error ~1e-16.
double log_mpz(const mpz_class& z);

struct ExactTail {
    mpz_class numerator;
    double log_value = 0.0;  // log(numerator) - log(n!)
    long long threshold = 0; // the snapped ceil(n x) or ceil(n^2 x)
    bool empty = false;      // threshold beyond the support
};

// Upper tail P(value >= threshold) with threshold = ceil(n x) (descents) or
// ceil(n^2 x) (major index). Thresholds past the support return an explicit
// empty tail rather than -inf.
ExactTail tail(const CountDistribution& dist, double x);
ExactTail tail(Statistic st, long n, double x, const SizeCaps& caps = {});

// P(S_n >= m) for the sum of n Uniform[0,1], by the alternating binomial sum.
// Capped at n <= 15 where double-precision cancellation stays below ~1e-9.
double irwin_hall_tail(int n, long long m);

struct FourierPmf {
    std::vector<double> probabilities;  // P(Sigma_n = k), k = 0..n(n-1)/2
    double max_negative_mass = 0.0;     // most negative raw DFT output
    double tilt = 0.0;
};

// Characteristic-function inversion of the Mahonian PMF on a DFT grid of
// length next-power-of-two >= support size (exact inversion up to roundoff).
// A positive tilt exp(tilt * k) sharpens deep upper tails; outputs are
// converted back to untilted probabilities.
FourierPmf pmf_via_fourier(long n, double tilt = 0.0, const SizeCaps& caps = {});

// Binary row cache: "PTCD", version byte, statistic tag, n, then
// length-prefixed little-endian magnitudes. Purely an accelerator; loaded
// rows are byte-identical to recomputed ones.
std::filesystem::path cache_file(const std::filesystem::path& dir, Statistic st,
                                 long n);
void store_cached(const CountDistribution& dist, const std::filesystem::path& dir);
std::optional<CountDistribution> load_cached(Statistic st, long n,
                                             const std::filesystem::path& dir);

// Load from cache when possible, otherwise compute and (if dir given) store.
CountDistribution row(Statistic st, long n,
                      const std::optional<std::filesystem::path>& cache_dir,
                      const SizeCaps& caps = {});

}  // namespace permtail::exact
