#pragma once
#include <cstdint>
#include <vector>

namespace ppond {

// Deterministic splitmix64 stream. Self-contained so sampled runs reproduce
// bit-for-bit across platforms and standard-library versions.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Index into a cumulative walk over `weights` (assumed to sum to ~1).
    int next_index(const std::vector<double>& weights) {
        double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    // Derive an independent substream; `tag` distinguishes sibling streams.
    RngStream fork(uint64_t tag) {
        uint64_t z = (0x9e3779b97f4a7c15ull ^ tag) + next_u64();
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        return RngStream(z ^ (z >> 27));
    }

private:
    uint64_t state_;
};

}  // namespace ppond
