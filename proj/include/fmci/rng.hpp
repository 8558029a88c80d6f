#pragma once

#include <cstdint>

namespace fmci::rng {

// SplitMix64 (Steele, Lea, Flood 2014).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform double in (0, 1).
    double uniform_open() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Independent substream for sample `index` of a run seeded with `seed`.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
    SplitMix64 mix2(mix.next() + index);
    return SplitMix64(mix2.next());
}

}  // namespace fmci::rng
