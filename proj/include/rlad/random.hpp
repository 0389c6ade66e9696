#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rlad {

/// Caller-owned random stream. Never share one between workers.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    explicit RandomStream(std::seed_seq& seq) : engine_(seq) {}

    /// 64-bit seed of replicate `index` in a run seeded with `master_seed`.
    static std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(index),
                          static_cast<std::uint32_t>(index >> 32),
                          0x524c4144u};
        std::uint32_t words[2];
        seq.generate(words, words + 2);
        return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
    }

    /// Stream for replicate `index`. Depends only on the pair, so results do not
    /// depend on scheduling.
    static RandomStream for_replicate(std::uint64_t master_seed, std::uint64_t index)
    {
        return RandomStream(derive_seed(master_seed, index));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

}  // namespace rlad
