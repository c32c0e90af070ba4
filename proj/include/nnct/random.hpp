#pragma once

// Counter-keyed random streams.
//
// Every Monte Carlo unit of work (a replication, a permutation) owns a stream
// keyed by (seed, purpose, index). The stream state is a pure function of the
// key, so results do not depend on which worker runs which index or in what
// order. The engine is xoshiro256++ seeded through SplitMix64.

#include <array>
#include <cstdint>
#include <limits>
#include <iterator>
#include <utility>

namespace nnct {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Purpose tags keep streams for different jobs disjoint under the same seed.
enum class StreamPurpose : std::uint64_t {
    pattern = 1,
    permutation = 2,
    qr_estimate = 3,
    fixture = 4,
};

class StreamRng {
public:
    using result_type = std::uint64_t;

    StreamRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index) noexcept
    {
        std::uint64_t key = seed;
        std::uint64_t mixed = splitmix64(key);
        key = mixed ^ (static_cast<std::uint64_t>(purpose) * 0xd1b54a32d192ed03ULL);
        mixed = splitmix64(key);
        key = mixed ^ index;
        for (auto& word : state_) {
            word = splitmix64(key);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Fisher-Yates; the sequence of draws is fixed so results are portable.
    template <class Range>
    void shuffle(Range& range) noexcept
    {
        using std::swap;
        const auto size = static_cast<std::uint64_t>(std::size(range));
        for (std::uint64_t i = size; i > 1; --i) {
            const std::uint64_t j = below(i);
            swap(range[i - 1], range[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace nnct
