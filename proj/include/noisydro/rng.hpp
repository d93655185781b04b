#pragma once
#include <cstdint>

namespace noisydro {

// splitmix64 generator. Chosen over std::mt19937_64 +
// std::uniform_real_distribution because the distribution adapters are not
// bit-reproducible across standard library implementations, and experiment
// outputs are required to be byte-identical for a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_u01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_u01();
    }

    // Integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;
    }

    // Independent stream derived from (seed, index). Streams are
    // order-independent, so parallel trials indexed by `index` reproduce the
    // sequential results exactly.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        Rng mixer(seed ^ (0x632be59bd9b4e019ull * (index + 1)));
        return Rng(mixer.next_u64());
    }

private:
    std::uint64_t state_;
};

} // namespace noisydro
