#include "permtail/montecarlo.hpp"

#include <numeric>

#include "permtail/errors.hpp"

namespace permtail::mc {

std::uint64_t bounded(Xoshiro256pp& rng, std::uint64_t bound) {
    // Lemire: high word of a 128-bit product, with rejection of the biased slice
    while (true) {
        const std::uint64_t x = rng.next();
        const unsigned __int128 m =
            static_cast<unsigned __int128>(x) * static_cast<unsigned __int128>(bound);
        const std::uint64_t low = static_cast<std::uint64_t>(m);
        if (low >= bound) return static_cast<std::uint64_t>(m >> 64);
        const std::uint64_t threshold = (0 - bound) % bound;
        if (low >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
}

void shuffle(std::vector<int>& perm, Xoshiro256pp& rng) {
    for (std::size_t i = perm.size(); i > 1; --i) {
        const std::uint64_t j = bounded(rng, i);
        std::swap(perm[i - 1], perm[j]);
    }
}

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block_index) {
    SplitMix64 sm{seed + block_index * 0x9E3779B97F4A7C15ULL};
    return sm.next();
}

SampleStats sample_stats(saddle::Statistic st, long n, long trials,
                         std::uint64_t seed, const std::vector<long>& thresholds) {
    if (n < 2) throw DomainError("sample_stats: n must be >= 2");
    if (trials < 1) throw DomainError("sample_stats: trials must be >= 1");

    std::uint64_t sum = 0;
    unsigned __int128 sum_sq = 0;
    std::map<long, std::uint64_t> hits;
    for (long thr : thresholds) hits[thr] = 0;

    std::vector<int> perm(n);
    const long blocks = (trials + kBlockTrials - 1) / kBlockTrials;
    for (long b = 0; b < blocks; ++b) {
        Xoshiro256pp rng(block_seed(seed, static_cast<std::uint64_t>(b)));
        const long in_block =
            std::min<long>(kBlockTrials, trials - b * kBlockTrials);
        for (long trial = 0; trial < in_block; ++trial) {
            std::iota(perm.begin(), perm.end(), 1);
            shuffle(perm, rng);
            long descents = 0, major = 0;
            for (long k = 0; k + 1 < n; ++k) {
                if (perm[k] > perm[k + 1]) {
                    ++descents;
                    major += k + 1;
                }
            }
            const long value =
                st == saddle::Statistic::Descents ? descents : major;
            sum += static_cast<std::uint64_t>(value);
            sum_sq += static_cast<unsigned __int128>(value) *
                      static_cast<unsigned __int128>(value);
            for (auto& [thr, count] : hits)
                if (value >= thr) ++count;
        }
    }

    SampleStats stats;
    stats.statistic = st;
    stats.n = n;
    stats.trials = trials;
    stats.seed = seed;
    stats.tail_hits = std::move(hits);
    const double t = static_cast<double>(trials);
    stats.mean = static_cast<double>(sum) / t;
    if (trials > 1) {
        // (T * sum x^2 - (sum x)^2) / (T (T-1)), numerator exact in 128 bits
        const unsigned __int128 s2 = static_cast<unsigned __int128>(sum) *
                                     static_cast<unsigned __int128>(sum);
        const unsigned __int128 num =
            sum_sq * static_cast<unsigned __int128>(trials) - s2;
        stats.variance =
            static_cast<double>(static_cast<long double>(num)) / (t * (t - 1.0));
    }
    return stats;
}

}  // namespace permtail::mc
