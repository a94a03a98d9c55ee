#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "permtail/saddle.hpp"

// Seeded uniform-permutation sampling: D_n counts positions k with
// pi(k) > pi(k+1), M_n sums those (1-based) positions.
//
// Generator: xoshiro256++ with state expanded from the seed by SplitMix64.
// Trials run in fixed blocks of 65536; block b is seeded with
// splitmix64(seed + b * 0x9E3779B97F4A7C15), so a partition of blocks across
// workers merges to the same totals regardless of scheduling. Accumulators
// are integers, which makes reruns byte-identical.

namespace permtail::mc {

struct SplitMix64 {
    std::uint64_t state = 0;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

struct Xoshiro256pp {
    std::array<std::uint64_t, 4> s{};

    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : s) w = sm.next();
    }

    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
};

// Unbiased integer in [0, bound) (Lemire multiply-shift with rejection).
std::uint64_t bounded(Xoshiro256pp& rng, std::uint64_t bound);

// Unbiased in-place Fisher-Yates shuffle.
void shuffle(std::vector<int>& perm, Xoshiro256pp& rng);

constexpr long kBlockTrials = 65536;
std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block_index);

struct SampleStats {
    saddle::Statistic statistic = saddle::Statistic::Descents;
    long n = 0;
    long trials = 0;
    double mean = 0.0;
    double variance = 0.0;  // unbiased sample variance
    std::map<long, std::uint64_t> tail_hits;
    std::uint64_t seed = 0;
};

SampleStats sample_stats(saddle::Statistic st, long n, long trials,
                         std::uint64_t seed, const std::vector<long>& thresholds);

}  // namespace permtail::mc
