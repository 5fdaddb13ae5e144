#pragma once

#include <cstdint>
#include <cmath>
#include <string>

namespace qlm {

// Splittable counter-style PRNG built on splitmix64.
//
// Streams are derived, not iterated: every consumer (trace generator, each
// packet's decision stream, the server tick clock) gets its own stream keyed
// by (root_seed, purpose tag, index). Results are therefore independent of
// engine iteration order and of how trials are scheduled across threads.
//
// The generator identity is part of the output contract; see rng_identity().

inline constexpr const char* kRngIdentity = "splitmix64-v1";

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// One-shot mix used to key derived streams.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9E3779B97F4A7C15ULL + (b << 1));
    std::uint64_t z = splitmix64_next(s);
    return z ^ splitmix64_next(s);
}

class RngStream {
public:
    RngStream() : state_(0) {}
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    static RngStream derived(std::uint64_t root, std::uint64_t tag) {
        return RngStream(mix64(root, tag));
    }
    static RngStream derived(std::uint64_t root, std::uint64_t tag, std::uint64_t index) {
        return RngStream(mix64(mix64(root, tag), index));
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform in [0, 1); 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return next_unit() < p;
    }

    // Uniform over {0, 1, ..., n-1} via 128-bit multiply.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        unsigned __int128 wide = static_cast<unsigned __int128>(next_u64());
        return static_cast<std::uint64_t>((wide * n) >> 64);
    }

    double exponential(double rate) {
        // next_unit() < 1, so the argument to log1p stays in (-1, 0].
        return -std::log1p(-next_unit()) / rate;
    }

private:
    std::uint64_t state_;
};

// Purpose tags for derived streams (stable across versions).
namespace stream_tag {
inline constexpr std::uint64_t kTrace = 0x7472616365ULL;        // "trace"
inline constexpr std::uint64_t kPacket = 0x7061636B6574ULL;     // "packet"
inline constexpr std::uint64_t kServer = 0x736572766572ULL;     // "server"
}  // namespace stream_tag

inline std::string rng_identity() { return kRngIdentity; }

}  // namespace qlm
