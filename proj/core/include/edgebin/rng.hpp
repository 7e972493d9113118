#pragma once

#include <cstdint>
#include <cmath>

namespace edgebin {

// splitmix64: used to derive independent sub-seeds from a master seed
// (per-image augmentation draws, per-tensor weight streams).
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    uint64_t s = master + 0x632be59bd9b4e019ULL * (stream + 1);
    return splitmix64(s);
}

// Small deterministic generator. std::mt19937_64 has a standardized
// sequence but the standard distributions do not, so the uniform/normal
// mappings are written out here to keep outputs bit-identical across
// standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed == 0 ? 0x9e3779b97f4a7c15ULL : seed) {
        // warm up so that small seeds decorrelate
        for (int i = 0; i < 4; ++i) splitmix64(state_);
    }

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    float uniform_f(float lo, float hi) {
        return static_cast<float>(uniform(lo, hi));
    }

    // integer in [0, n)
    uint64_t next_below(uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Box-Muller; consumes two draws per pair, caches the second.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_cached_) {
            has_cached_ = false;
            return mean + stddev * cached_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return mean + stddev * r * std::cos(theta);
    }

private:
    uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace edgebin
