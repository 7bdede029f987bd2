#pragma once

#include <cmath>
#include <cstdint>

namespace edm {

// splitmix64 stream. All seeded behaviour in this project goes through this
// class instead of <random> distributions so that identical seeds give
// identical bytes regardless of the standard library build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // inclusive on both ends
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    // Box-Muller; the spare value is discarded so the stream position stays
    // a pure function of call count.
    double normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // independent child stream for (seed, tag)
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
        Rng r(seed ^ (0x6a09e667f3bcc909ull + tag * 0x3c6ef372fe94f82bull));
        r.next_u64();
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

// FNV-1a, used where a stable hash of an id string is needed (fold splits).
inline std::uint64_t fnv1a64(const char* data, std::size_t len) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace edm
