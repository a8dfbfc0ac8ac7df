#pragma once

#include <cmath>
#include <cstdint>

namespace singvoc {

// Counter-based generator: output i is a pure function of (seed, i), so a
// stream can be replayed bit-exactly from a stored (seed, counter) pair and
// split into independent substreams by label. Mixing is the splitmix64
// finalizer.
class Rng {
public:
    explicit Rng(uint64_t seed = 0x5eed5eed5eed5eedULL, uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    uint64_t seed() const { return seed_; }
    uint64_t counter() const { return counter_; }
    void restore(uint64_t seed, uint64_t counter) {
        seed_ = seed;
        counter_ = counter;
    }

    uint64_t next_u64() { return value_at(counter_++); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        // Box-Muller; consumes two counters per call.
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // Independent substream; does not advance this stream.
    Rng split(uint64_t label) const {
        return Rng(mix(seed_ ^ mix(label + 0x632be59bd9b4e019ULL)), 0);
    }

private:
    uint64_t value_at(uint64_t i) const {
        return mix(seed_ + i * 0x9e3779b97f4a7c15ULL);
    }

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t seed_;
    uint64_t counter_;
};

} // namespace singvoc
