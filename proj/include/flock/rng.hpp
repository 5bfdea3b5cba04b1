#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace flock {

// splitmix64 finalizer; the single mixing primitive behind every stream in
// the library. Substream k of master seed s is splitmix64(s ^ golden*k),
// which is the documented counter-based split used for replicas, noise
// increments and samplers.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t k) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (k + 1)));
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return substream(substream(seed, a), b);
}

// uniform in [0,1) from 53 high bits
inline double u01(std::uint64_t h) { return double(h >> 11) * 0x1.0p-53; }
// uniform in (0,1]
inline double u01_open(std::uint64_t h) { return (double(h >> 11) + 1.0) * 0x1.0p-53; }

// Counter-based sequential stream. State is just (seed, counter), so any
// draw is reproducible from its index alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return splitmix64(seed_ ^ splitmix64(ctr_++)); }
    double uniform() { return u01(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01_open(next_u64());
        double u2 = u01(next_u64());
        double r = std::sqrt(-2.0 * std::log(u1));
        double c = std::cos(2.0 * M_PI * u2), s = std::sin(2.0 * M_PI * u2);
        spare_ = r * s;
        have_spare_ = true;
        return r * c;
    }

    // uniform on the unit ball in R^d
    void unit_ball(int d, double* out) {
        double n2;
        do {
            n2 = 0.0;
            for (int k = 0; k < d; ++k) {
                out[k] = normal();
                n2 += out[k] * out[k];
            }
        } while (n2 == 0.0);
        double r = std::pow(uniform(), 1.0 / d) / std::sqrt(n2);
        for (int k = 0; k < d; ++k) out[k] *= r;
    }

private:
    std::uint64_t seed_;
    std::uint64_t ctr_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// One standard Gaussian per (step, agent, axis), regenerable bit-exactly
// from the seed and the indices.
struct NoisePath {
    std::uint64_t seed = 0;

    double gaussian(std::uint64_t step, std::uint64_t agent, std::uint64_t axis) const {
        std::uint64_t key = splitmix64(seed ^ splitmix64(step * 0x9E3779B97F4A7C15ULL + agent));
        std::uint64_t h1 = splitmix64(key ^ (2 * axis));
        std::uint64_t h2 = splitmix64(key ^ (2 * axis + 1));
        double u1 = u01_open(h1);
        double u2 = u01(h2);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

} // namespace flock
