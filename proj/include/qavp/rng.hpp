#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace qavp {

// splitmix64 finalizer; used to mix seed words into substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent substream seed from a base seed and a list of
// index words (snr index, trial index, purpose tag, ...). Adding new
// purpose tags never perturbs existing streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = mix64(base);
    for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
    return h;
}

// Purpose tags for per-trial substreams.
enum class StreamTag : std::uint64_t {
    channel = 1,
    data = 2,
    noise = 3,
    solver = 4,
    ice = 5,
    init = 6,
};

// Deterministic random stream. mt19937_64 output is pinned by the
// standard and the float conversions below avoid std::*_distribution,
// whose output is implementation defined; the same seed therefore
// yields the same values on every platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(next_u64() % span);
    }

    // standard normal via Box-Muller
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        has_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline RandomStream substream(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
    return RandomStream(derive_seed(base, words));
}

}  // namespace qavp
