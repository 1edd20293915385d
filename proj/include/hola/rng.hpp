#pragma once

#include <cmath>
#include <cstdint>

namespace hola {

/// Small deterministic generator (splitmix64 stream) with the handful of
/// samplers the simulator needs.  Self-contained so that simulated datasets
/// are byte-identical across platforms and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on (0, 1].
    double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    /// Poisson by counting unit-exponential arrivals; stable for any mean
    /// reachable here (cost linear in the mean).
    long long poisson(double mean) {
        long long k = -1;
        double total = 0.0;
        while (total <= mean) {
            total += -std::log(uniform());
            ++k;
        }
        return k;
    }

    int bernoulli(double p) { return uniform() <= p ? 1 : 0; }

    /// Derived stream for an independent sub-task.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

}  // namespace hola
