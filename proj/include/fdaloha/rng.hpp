#pragma once

// Counter-keyed random streams. Every draw in a replication belongs to a
// stream identified by (master seed, replication, slot, tag, index), so the
// sequence a stream produces never depends on how many draws other streams
// consumed or on the order in which streams are evaluated.

#include <cstdint>
#include <limits>

namespace fdaloha {

enum class StreamTag : std::uint64_t {
    topology = 1,    // cluster count at t = 0
    relocation = 2,  // per-slot cluster centres and peer angles
    access = 3,      // q-persistent MAC decisions
    fading = 4,      // Rayleigh fading, one sub-stream per receiver
    arrival = 5,     // packet generation
    oracle = 6,      // test and oracle use
};

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
    std::uint64_t slot = 0;
    StreamTag tag = StreamTag::oracle;
    std::uint64_t index = 0;

    [[nodiscard]] std::uint64_t digest() const;
};

// SplitMix64 sequence started at a key digest. Satisfies
// UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t state) : state_(state) {}
    explicit CounterRng(const StreamKey& key) : state_(key.digest()) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1].
    double uniform_open_low() { return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53; }

    // Unit-mean exponential (ziggurat).
    double exponential();

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

} // namespace fdaloha
